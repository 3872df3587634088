//! Result serialization: one CSV per combination matrix, a ranking
//! table, and a JSON manifest tying outputs to input digests and
//! configuration.
//!
//! All numeric output uses a fixed 10-decimal format with a `.`
//! separator, so files are byte-comparable across runs and platforms.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bench::{BenchError, BenchRun, SimilarityMatrix};

/// Fixed-width numeric rendering used in every report file.
pub fn format_value(v: f64) -> String {
    format!("{v:.10}")
}

fn sha256_hex(data: &str) -> String {
    let digest = Sha256::digest(data.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Raw input documents; hashed into the manifest so a result set can be
/// traced back to exactly the files that produced it.
#[derive(Debug, Clone, Copy)]
pub struct RunInputs<'a> {
    pub taxonomy: &'a str,
    pub cohort: &'a str,
    pub truth: Option<&'a str>,
}

/// CSV form of one similarity matrix, pseudonym header row and column.
pub fn matrix_csv(m: &SimilarityMatrix) -> String {
    let mut out = String::from("pseudonym");
    for p in m.pseudonyms() {
        out.push(',');
        out.push_str(p);
    }
    out.push('\n');
    for (i, p) in m.pseudonyms().iter().enumerate() {
        out.push_str(p);
        for j in 0..m.len() {
            out.push(',');
            out.push_str(&format_value(m.get(i, j)));
        }
        out.push('\n');
    }
    out
}

/// Ranking CSV, best correlation first. Combination ids contain commas,
/// so the combo column is always quoted; undefined correlations print as
/// `nan` and sort behind every defined value.
pub fn ranking_csv(run: &BenchRun) -> String {
    let mut out = String::from("combo,r\n");
    for idx in run.ranking() {
        let result = &run.results[idx];
        let r = result
            .r
            .map_or_else(|| "nan".to_owned(), format_value);
        out.push_str(&format!("\"{}\",{}\n", result.combo.id(), r));
    }
    out
}

/// JSON manifest: tool identity, input digests, the caller's effective
/// configuration, and the ranked correlations.
pub fn run_manifest(run: &BenchRun, config: &Value, inputs: &RunInputs) -> String {
    let ranking: Vec<Value> = run
        .ranking()
        .into_iter()
        .map(|idx| {
            let result = &run.results[idx];
            json!({
                "combo": result.combo.id(),
                "r": result.r,
            })
        })
        .collect();
    let manifest = json!({
        "tool": "taxosim",
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": {
            "taxonomy_sha256": sha256_hex(inputs.taxonomy),
            "cohort_sha256": sha256_hex(inputs.cohort),
            "truth_sha256": inputs.truth.map(sha256_hex),
        },
        "config": config,
        "combo_count": run.results.len(),
        "ranking": ranking,
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    text.push('\n');
    text
}

/// Write one matrix CSV per combination plus `ranking.csv` and
/// `run.json` into `dir`, creating it if needed.
pub fn write_outputs(
    dir: &Path,
    run: &BenchRun,
    config: &Value,
    inputs: &RunInputs,
) -> Result<(), BenchError> {
    fs::create_dir_all(dir)?;
    for result in &run.results {
        let path = dir.join(format!("{}.csv", result.combo.id()));
        fs::write(path, matrix_csv(&result.matrix))?;
    }
    fs::write(dir.join("ranking.csv"), ranking_csv(run))?;
    fs::write(dir.join("run.json"), run_manifest(run, config, inputs))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{AlgorithmCombo, ComboResult};

    #[test]
    fn fixed_decimal_rendering() {
        assert_eq!(format_value(2f64.ln()), "0.6931471806");
        assert_eq!(format_value(1.0), "1.0000000000");
        assert_eq!(format_value(10.0), "10.0000000000");
        assert_eq!(format_value(0.0), "0.0000000000");
        assert_eq!(format_value(-0.25), "-0.2500000000");
    }

    fn tiny_run() -> BenchRun {
        let m = |vals: [f64; 4]| {
            SimilarityMatrix::new(
                vec!["P1".to_owned(), "P2".to_owned()],
                vals.to_vec(),
            )
        };
        BenchRun {
            results: vec![
                ComboResult {
                    combo: "set=dice,unscaled".parse::<AlgorithmCombo>().unwrap(),
                    matrix: m([1.0, 0.5, 0.5, 1.0]),
                    r: Some(0.25),
                },
                ComboResult {
                    combo: "set=jaccard,unscaled".parse::<AlgorithmCombo>().unwrap(),
                    matrix: m([1.0, 0.25, 0.25, 1.0]),
                    r: None,
                },
                ComboResult {
                    combo: "ic=level,cs=lch,set=mbm,scaled".parse::<AlgorithmCombo>().unwrap(),
                    matrix: m([1.0, 0.75, 0.75, 1.0]),
                    r: Some(0.75),
                },
            ],
        }
    }

    #[test]
    fn matrix_csv_layout() {
        let run = tiny_run();
        let csv = matrix_csv(&run.results[0].matrix);
        assert_eq!(
            csv,
            "pseudonym,P1,P2\nP1,1.0000000000,0.5000000000\nP2,0.5000000000,1.0000000000\n"
        );
    }

    #[test]
    fn ranking_orders_and_quotes() {
        let csv = ranking_csv(&tiny_run());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "combo,r");
        assert_eq!(lines[1], "\"ic=level,cs=lch,set=mbm,scaled\",0.7500000000");
        assert_eq!(lines[2], "\"set=dice,unscaled\",0.2500000000");
        assert_eq!(lines[3], "\"set=jaccard,unscaled\",nan");
    }

    #[test]
    fn manifest_embeds_digests_and_config() {
        let run = tiny_run();
        let inputs = RunInputs {
            taxonomy: "root,\n",
            cohort: "P1,root\n",
            truth: None,
        };
        let config = json!({"scale_log": "e"});
        let text = run_manifest(&run, &config, &inputs);
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["tool"], "taxosim");
        assert_eq!(parsed["config"]["scale_log"], "e");
        assert_eq!(
            parsed["inputs"]["taxonomy_sha256"].as_str().unwrap().len(),
            64
        );
        assert!(parsed["inputs"]["truth_sha256"].is_null());
        assert_eq!(parsed["combo_count"], 3);
        assert_eq!(parsed["ranking"][0]["combo"], "ic=level,cs=lch,set=mbm,scaled");
        assert!(parsed["ranking"][2]["r"].is_null());
    }

    #[test]
    fn outputs_land_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let run = tiny_run();
        let inputs = RunInputs { taxonomy: "t", cohort: "c", truth: Some("g") };
        write_outputs(dir.path(), &run, &json!({}), &inputs).unwrap();
        assert!(dir.path().join("set=dice,unscaled.csv").exists());
        assert!(dir.path().join("set=jaccard,unscaled.csv").exists());
        assert!(dir.path().join("ic=level,cs=lch,set=mbm,scaled.csv").exists());
        assert!(dir.path().join("ranking.csv").exists());
        assert!(dir.path().join("run.json").exists());
    }
}
