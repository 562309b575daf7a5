//! Draw processes as DOT: one game's extracted process with the gold-master
//! terminal, and a merged recommendation. Pipe either graph through
//! `dot -Tsvg` to get the picture.
//!
//!     cargo run -p procrec --example render_process

use std::fs;
use std::io::BufReader;

use procrec::context::{ContextMatrix, VariableCatalog};
use procrec::corpus::{ingest_elements, AbstractionDictionary};
use procrec::recommender::recommend;
use procrec::render::{render_extracted, render_recommended, RenderOptions};
use procrec::similarity::{find_similar, fit_pca};

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn main() {
    let dict = AbstractionDictionary::from_json(&fs::read_to_string(data("dictionary.json")).unwrap()).unwrap();
    let store = ingest_elements(BufReader::new(fs::File::open(data("elements.jsonl")).unwrap()))
        .unwrap()
        .normalize(&dict);

    // a finished game's own process ends at the gold master
    let options = RenderOptions {
        gold_terminal: true,
        ..RenderOptions::default()
    };
    let extracted = render_extracted(&store, "Slow Down, Bull", &options).unwrap();
    println!("// ---- extracted process of Slow Down, Bull ----");
    print!("{extracted}");

    // a recommendation for a project that does not exist yet
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
    let process = recommend(&store, &ranking).unwrap();
    let recommended = render_recommended(&process, &RenderOptions::default()).unwrap();
    println!("\n// ---- recommended process for {} ----", process.target);
    print!("{recommended}");
}
