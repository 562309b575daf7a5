//! Walk the 61-variable context catalog, build a project context from
//! variable ids, and lint it for internal contradictions.
//!
//!     cargo run -p procrec --example context_catalog

use procrec::context::{lint_context, ContextVector, VariableCatalog};

fn main() {
    let catalog = VariableCatalog::bundled();
    println!("{} variables in {} groups:", catalog.len(), {
        let mut groups: Vec<_> = catalog.variables().iter().map(|v| v.group).collect();
        groups.dedup();
        groups.len()
    });
    let mut current = None;
    for v in catalog.variables() {
        if current != Some(v.group) {
            current = Some(v.group);
            println!("  [{}]", v.group.as_str());
        }
        println!("    {}  {}", v.id, v.description);
    }

    // a plausible small-studio profile
    let profile = ContextVector::from_ids(
        "example project",
        &["v01", "v02", "v07", "v19", "v22", "v28", "v30", "v39", "v42", "v46", "v57", "v59"],
        &catalog,
    )
    .unwrap();
    println!("\nexample project sets {} variables:", profile.true_count());
    for id in profile.true_ids(&catalog) {
        println!("  {id}  {}", catalog.get(id).unwrap().description);
    }
    assert!(lint_context(&profile, &catalog).is_empty());

    // the linter catches profiles that claim contradictory facts
    let contradictory = ContextVector::from_ids(
        "confused project",
        &["v02", "v07", "v08", "v19", "v20"],
        &catalog,
    )
    .unwrap();
    println!("\nlint of a contradictory profile:");
    for warning in lint_context(&contradictory, &catalog) {
        println!("  warning: {warning}");
    }
}
