//! Score the recommender against what stored games actually did, then replay
//! a set of published-style confusion counts through the same formulas.
//!
//!     cargo run -p procrec --example evaluate_recommendations

use std::fs;
use std::io::BufReader;

use procrec::context::{ContextMatrix, VariableCatalog};
use procrec::corpus::{ingest_elements, AbstractionDictionary};
use procrec::evaluation::{
    evaluate_against_extracted, format_confusion_table, format_reports_table, replay_metrics,
};
use procrec::similarity::{find_similar, fit_pca};

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn main() {
    let dict = AbstractionDictionary::from_json(&fs::read_to_string(data("dictionary.json")).unwrap()).unwrap();
    let store = ingest_elements(BufReader::new(fs::File::open(data("elements.jsonl")).unwrap()))
        .unwrap()
        .normalize(&dict);
    let catalog = VariableCatalog::bundled();
    let matrix =
        ContextMatrix::read_csv(fs::File::open(data("contexts.csv")).unwrap(), &catalog).unwrap();

    // each stored game in turn: recommend from its neighbors, compare against
    // the elements its own postmortem reported
    let model = fit_pca(&matrix, 2).unwrap();
    let mut rows = Vec::new();
    for game in ["Slow Down, Bull", "Catlateral Damage", "Vanishing Point"] {
        let target = matrix.get(game).unwrap();
        let ranking = find_similar(&model, target, 3).unwrap();
        let report = evaluate_against_extracted(&store, game, &ranking).unwrap();
        rows.push((game.to_string(), report));
    }
    println!("recommendations vs. each game's own extracted process:\n");
    print!("{}", format_confusion_table(&rows.iter().map(|(g, r)| (g.clone(), r.cm)).collect::<Vec<_>>()));
    println!();
    print!("{}", format_reports_table(&rows));

    // same formulas over externally supplied counts
    let replayed = replay_metrics(fs::File::open(data("replay_published.csv")).unwrap()).unwrap();
    println!("\nreplayed runs:\n");
    print!("{}", format_reports_table(&replayed));
}
