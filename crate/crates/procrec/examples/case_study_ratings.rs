//! Tally developer ratings of a recommended process on five-point scales
//! across five dimensions, the way a follow-up interview would be scored.
//!
//!     cargo run -p procrec --example case_study_ratings

use std::fs;

use procrec::evaluation::{format_likert_table, likert_tally, percent, read_likert_csv};

fn main() {
    let path = format!("{}/data/likert_case_study.csv", env!("CARGO_MANIFEST_DIR"));
    let ratings = read_likert_csv(fs::File::open(path).unwrap()).unwrap();
    println!("{} ratings loaded", ratings.len());

    let tallies = likert_tally(&ratings);
    print!("\n{}", format_likert_table(&tallies));

    println!();
    for tally in &tallies {
        println!(
            "{}: {}% agree / {}% neutral / {}% disagree",
            tally.dimension.as_str(),
            percent(tally.agree_ratio()),
            percent(tally.neutral_ratio()),
            percent(tally.disagree_ratio()),
        );
    }
}
