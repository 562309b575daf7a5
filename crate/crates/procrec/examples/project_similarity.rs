//! Fit PCA over the bundled context matrix, project a new project into score
//! space, and rank stored games by closeness.
//!
//!     cargo run -p procrec --example project_similarity

use std::fs;

use procrec::context::{ContextMatrix, VariableCatalog};
use procrec::similarity::{export_biplot, find_similar, find_within_threshold, fit_pca};

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn main() {
    let catalog = VariableCatalog::bundled();
    let mut matrix =
        ContextMatrix::read_csv(fs::File::open(data("contexts.csv")).unwrap(), &catalog).unwrap();
    let target = ContextMatrix::read_csv(
        fs::File::open(data("target_case_study.csv")).unwrap(),
        &catalog,
    )
    .unwrap()
    .rows()[0]
        .clone();
    println!("{} stored contexts + target {:?}", matrix.len(), target.game);

    matrix.append(target.clone()).unwrap();
    let model = fit_pca(&matrix, 2).unwrap();

    let total: f64 = model.eigenvalues().iter().sum();
    println!("\nvariance explained:");
    let mut cumulative = 0.0;
    for (i, ev) in model.eigenvalues().iter().take(4).enumerate() {
        cumulative += ev / total;
        println!(
            "  pc{}: eigenvalue {ev:.4} ({:.1}% cumulative)",
            i + 1,
            cumulative * 100.0
        );
    }

    println!("\nscores (the biplot sample points):");
    for (game, score) in model.scores() {
        println!("  {game:<20} ({:+.4}, {:+.4})", score[0], score[1]);
    }

    let ranking = find_similar(&model, &target, 3).unwrap();
    println!("\n3 nearest neighbors of {:?}:", target.game);
    for (i, n) in ranking.neighbors.iter().enumerate() {
        println!("  {}. {} at distance {:.4}", i + 1, n.game, n.distance);
    }

    let close = find_within_threshold(&model, &target, 1.0).unwrap();
    println!(
        "\nwithin distance 1.0 instead of top-k: {:?}",
        close.neighbor_names()
    );

    // the score/loading table a plotting tool can consume directly
    let csv = export_biplot(&model).unwrap();
    println!("\nbiplot export, first lines:");
    for line in csv.lines().take(6) {
        println!("  {line}");
    }
}
