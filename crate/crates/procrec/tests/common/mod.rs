//! Helpers shared by the integration suites.
#![allow(dead_code)]

use std::path::PathBuf;

use procrec::context::{ContextMatrix, ContextVector, VariableCatalog};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Tiny synthetic catalog with `n` variables, for matrices narrower than the
/// bundled one.
pub fn catalog_of(n: usize) -> VariableCatalog {
    let groups = [
        "activities",
        "team",
        "management",
        "technical",
        "platform",
        "design",
    ];
    let vars: Vec<String> = (1..=n)
        .map(|i| {
            format!(
                r#"{{"id":"v{:02}","group":"{}","description":"synthetic variable {}"}}"#,
                i,
                groups[(i - 1) % groups.len()],
                i
            )
        })
        .collect();
    VariableCatalog::from_json(&format!("[{}]", vars.join(","))).unwrap()
}

/// Builds a matrix from row-major bits; games are named a, b, c, ... in row
/// order.
pub fn matrix_from_bits(bits: &[Vec<bool>], catalog: &VariableCatalog) -> ContextMatrix {
    let mut matrix = ContextMatrix::new();
    for (i, row) in bits.iter().enumerate() {
        let name = ((b'a' + (i % 26) as u8) as char).to_string();
        let name = if i < 26 { name } else { format!("{name}{}", i / 26) };
        matrix
            .append(ContextVector::new(name, row.clone(), catalog).unwrap())
            .unwrap();
    }
    matrix
}
