//! Markdown stability table assembled from run manifests.

use crate::RunManifest;

fn analysis(m: &RunManifest) -> Option<String> {
    let n = m.n.map(|n| n.to_string()).unwrap_or_default();
    let shape = m.shape.as_deref().unwrap_or("circle");
    Some(match m.subcommand.as_str() {
        "solve" => format!("marching, {shape}, N = {n}, {} steps", m.steps.unwrap_or(0)),
        "roots" => "mode scan".to_string(),
        "roots-discrete" => format!("discrete scan, N = {n}"),
        _ => return None,
    })
}

fn detail(m: &RunManifest) -> String {
    let o = &m.outcome;
    match m.subcommand.as_str() {
        "solve" => format!("rate {:.2e}/step", o["rate"].as_f64().unwrap_or(f64::NAN)),
        _ => {
            let max_im = o["max_im"].as_f64().map_or("none".to_string(), |v| format!("{v:.3e}"));
            let zero = o["zero_modes"].as_array().map_or(0, Vec::len);
            format!("max Im {max_im}, {} roots, Ω = 0 in {zero} modes", o["roots"])
        }
    }
}

/// One row per solve or scan manifest, sorted by formulation then analysis.
pub fn stability_table(manifests: &[RunManifest]) -> String {
    let mut rows: Vec<(String, String, String, String)> = manifests
        .iter()
        .filter_map(|m| {
            let a = analysis(m)?;
            let verdict = m.outcome["verdict"].as_str().unwrap_or("?").to_string();
            Some((m.formulation.clone().unwrap_or_default(), a, verdict, detail(m)))
        })
        .collect();
    rows.sort();
    let mut out = String::from("| formulation | analysis | verdict | detail |\n|---|---|---|---|\n");
    for (f, a, v, d) in rows {
        out.push_str(&format!("| {f} | {a} | {v} | {d} |\n"));
    }
    out
}
