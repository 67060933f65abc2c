//! DOT export of the condensation: one node per strongly connected
//! component labeled with its sectors and spectral class, closures drawn
//! with a double border.

use leontief_core::{
    BlockTriangularForm, GraphFacts, SccDecomposition, SpectralClass, SpectralClassification,
};

fn class_annotation(class: SpectralClass) -> (&'static str, &'static str) {
    // (label suffix, fill color)
    match class {
        SpectralClass::BelowOne => ("rho < 1", "lightblue"),
        SpectralClass::One => ("rho = 1", "lightyellow"),
        SpectralClass::AboveOne => ("rho > 1", "lightcoral"),
    }
}

/// Renders the condensation in block order. Deterministic output: nodes in
/// canonical dependency order, edges sorted.
pub fn export_dot(
    btf: &BlockTriangularForm,
    spectral: &SpectralClassification,
    dec: &SccDecomposition,
    facts: &GraphFacts,
    labels: &[String],
) -> String {
    let k = btf.block_count();
    // component id -> block position
    let mut block_of_comp = vec![0usize; k];
    for b in 0..k {
        let comp = dec.component_of[btf.block_vertices(b)[0]];
        block_of_comp[comp] = b;
    }

    let mut out =
        String::from("digraph condensation {\n  rankdir=LR;\n  node [shape=box, style=filled];\n");
    for b in 0..k {
        let comp = dec.component_of[btf.block_vertices(b)[0]];
        let sectors: Vec<&str> = btf
            .block_vertices(b)
            .iter()
            .map(|&v| labels[v].as_str())
            .collect();
        let (class, color) = class_annotation(spectral.blocks[b].class);
        let closure = facts.component_is_closure[comp];
        out.push_str(&format!(
            "  b{} [label=\"B{}: {}\\nrho = {:.6} ({}){}\", fillcolor={}{}];\n",
            b + 1,
            b + 1,
            sectors.join(", "),
            spectral.blocks[b].rho,
            class,
            if closure { "\\nclosure" } else { "" },
            color,
            if closure { ", peripheries=2" } else { "" },
        ));
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (c, succs) in dec.condensation.iter().enumerate() {
        for &t in succs {
            edges.push((block_of_comp[c], block_of_comp[t]));
        }
    }
    edges.sort_unstable();
    for (from, to) in edges {
        out.push_str(&format!("  b{} -> b{};\n", from + 1, to + 1));
    }
    out.push_str("}\n");
    out
}
