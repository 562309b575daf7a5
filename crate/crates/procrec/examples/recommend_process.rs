//! The full recommendation flow: normalize the corpus, rank neighbors for a
//! new project, and merge their processes into one recommendation with
//! provenance.
//!
//!     cargo run -p procrec --example recommend_process

use std::fs;
use std::io::BufReader;

use procrec::context::{ContextMatrix, VariableCatalog};
use procrec::corpus::{ingest_elements, AbstractionDictionary};
use procrec::recommender::recommend;
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
    let mut matrix =
        ContextMatrix::read_csv(fs::File::open(data("contexts.csv")).unwrap(), &catalog).unwrap();
    let target = ContextMatrix::read_csv(
        fs::File::open(data("target_case_study.csv")).unwrap(),
        &catalog,
    )
    .unwrap()
    .rows()[0]
        .clone();

    matrix.append(target.clone()).unwrap();
    let model = fit_pca(&matrix, 2).unwrap();
    let ranking = find_similar(&model, &target, 3).unwrap();
    println!("neighbors of {:?}: {:?}\n", target.game, ranking.neighbor_names());

    let process = recommend(&store, &ranking).unwrap();
    println!(
        "recommended process: {} merged elements from {} games",
        process.elements.len(),
        process.neighbor_games.len()
    );
    for element in &process.elements {
        let stage = element
            .subphase
            .map(|s| s.as_str())
            .unwrap_or(match element.phase {
                procrec::corpus::Phase::Activities => "unordered",
                _ => "-",
            });
        let flag = if element.prob { " [problematic]" } else { "" };
        println!("\n{} / {stage}: {}{flag}", element.phase.as_str(), element.key);
        for source in &element.sources {
            println!("    {} — \"{}\"", source.game, source.desc);
        }
    }

    // machine-readable form, stable across runs
    let json = process.to_json().unwrap();
    println!("\nJSON output is {} bytes; first lines:", json.len());
    for line in json.lines().take(8) {
        println!("  {line}");
    }
}
