use std::path::Path;

use polykit::report::format_percent;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{file_stem, write, Header};
use crate::scoring::{load_predictions, score_model, EvalSet, ModelScores};

/// Score table in percent: one row per (dataset, metric), one column per
/// language, then the mean over languages. The last row averages all metric
/// rows.
pub fn score_table_tsv(scores: &ModelScores) -> String {
    let mut out = String::from("dataset\tmetric");
    for lang in &scores.languages {
        out.push('\t');
        out.push_str(lang);
    }
    out.push_str("\tall\n");
    let cell = |v: Option<&f64>| v.map(|v| format_percent(*v)).unwrap_or_else(|| "-".to_string());
    for row in &scores.rows {
        out.push_str(&format!("{}\t{}", row.dataset, row.metric));
        for lang in &scores.languages {
            out.push('\t');
            out.push_str(&cell(row.per_language.get(lang)));
        }
        out.push_str(&format!("\t{}\n", format_percent(row.overall)));
    }
    out.push_str("Avg\t-");
    for lang in &scores.languages {
        out.push('\t');
        out.push_str(&cell(scores.avg.per_language.get(lang)));
    }
    out.push_str(&format!("\t{}\n", format_percent(scores.avg.overall)));
    out
}

pub fn run(cfg: &RunConfig, predictions: &Path) -> Result<(), CliError> {
    let eval = EvalSet::load(cfg)?;
    let registry = cfg.registry()?;
    let models = load_predictions(predictions, &eval, &registry, cfg.regime()?)?;
    let out_dir = cfg.out_dir().join("eval");
    for model in &models {
        let scores = score_model(&eval, model)?;
        let header = Header::new(cfg).with("model", &model.model).with("split", "test");
        let table = score_table_tsv(&scores);
        let stem = file_stem(&model.model);
        write(&out_dir.join(format!("{stem}.scores.tsv")), &(header.tsv() + &table))?;
        write(&out_dir.join(format!("{stem}.scores.json")), &crate::output::json_document(&header, &scores))?;
        println!("model {}", model.model);
        print!("{table}");
        if scores.unpredicted > 0 {
            eprintln!("warning: model {} has no prediction for {} test sample(s)", model.model, scores.unpredicted);
        }
    }
    Ok(())
}
