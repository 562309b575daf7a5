//! Load the bundled postmortem corpus, apply the abstraction dictionary, and
//! show what normalization buys.
//!
//!     cargo run -p procrec --example ingest_corpus

use std::collections::BTreeSet;
use std::fs;
use std::io::BufReader;

use procrec::corpus::{ingest_elements, AbstractionDictionary};

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn main() {
    let file = fs::File::open(data("elements.jsonl")).unwrap();
    let raw = ingest_elements(BufReader::new(file)).unwrap();
    println!(
        "raw corpus: {} records across {} games",
        raw.len(),
        raw.game_count()
    );

    let keys_of = |store: &procrec::corpus::ElementStore| -> BTreeSet<String> {
        store.records().iter().map(|r| r.key.clone()).collect()
    };
    let before = keys_of(&raw);

    let dict = AbstractionDictionary::from_json(&fs::read_to_string(data("dictionary.json")).unwrap()).unwrap();
    let store = raw.normalize(&dict);
    let after = keys_of(&store);
    println!(
        "dictionary with {} aliases folded {} distinct keys into {}",
        dict.len(),
        before.len(),
        after.len()
    );
    for gone in before.difference(&after) {
        println!("  merged away: {gone} -> {}", dict.lookup(gone));
    }

    println!("\nper game:");
    for game in store.games() {
        let records = store.records_of(game);
        let problems = records.iter().filter(|r| r.prob).count();
        println!("  {game}: {} elements, {problems} flagged problematic", records.len());
    }

    // normalization is idempotent: a second pass changes nothing
    assert_eq!(store.to_jsonl_string().unwrap(), store.normalize(&dict).to_jsonl_string().unwrap());
    println!("\nsecond normalization pass is a no-op, as it should be");
}
