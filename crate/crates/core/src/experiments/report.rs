use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{summarize, AccuracyRow, CellSummary, WalkRow};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResult {
    pub accuracies: Vec<AccuracyRow>,
    pub walk_rows: Vec<WalkRow>,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    quantile_method: &'static str,
    std: &'static str,
    whiskers: &'static str,
    cells: &'a [CellSummary],
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn opt<T: ToString>(value: &Option<T>) -> String {
    value.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// `setting,kind,k,self_loops,run,seed,test_accuracy,error`
pub fn write_accuracies_csv<W: Write>(rows: &[AccuracyRow], out: W, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = csv_error(path);
    w.write_record([
        "setting",
        "kind",
        "k",
        "self_loops",
        "run",
        "seed",
        "test_accuracy",
        "error",
    ])
    .map_err(&err)?;
    for row in rows {
        w.write_record([
            row.setting.clone(),
            row.kind.as_str().to_string(),
            row.k.to_string(),
            row.self_loops.to_string(),
            row.run.to_string(),
            row.seed.0.to_string(),
            opt(&row.test_accuracy),
            opt(&row.error),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `setting,self_loops,k,mean,std,estimate`; the estimate is empty for `k >= 3`.
pub fn write_walk_csv<W: Write>(rows: &[WalkRow], out: W, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = csv_error(path);
    w.write_record(["setting", "self_loops", "k", "mean", "std", "estimate"])
        .map_err(&err)?;
    for row in rows {
        w.write_record([
            row.setting.clone(),
            row.self_loops.to_string(),
            row.k.to_string(),
            row.mean.to_string(),
            row.std.to_string(),
            opt(&row.estimate),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `accuracies.csv`, `walk_stats.csv` and `summary.json` into `out_dir`.
pub fn emit_report(results: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if results.accuracies.is_empty() && results.walk_rows.is_empty() {
        return Err(Error::Config("no results to report".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let create = |name: &str| -> Result<(PathBuf, std::fs::File)> {
        let path = out_dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok((path, file))
    };

    let (acc_path, file) = create("accuracies.csv")?;
    write_accuracies_csv(&results.accuracies, file, &acc_path)?;
    let (walk_path, file) = create("walk_stats.csv")?;
    write_walk_csv(&results.walk_rows, file, &walk_path)?;

    let cells = summarize(&results.accuracies);
    let summary = SummaryFile {
        quantile_method: "linear interpolation at (n-1)p",
        std: "population",
        whiskers: "most extreme values within 1.5 IQR of the quartiles",
        cells: &cells,
    };
    let summary_path = out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).map_err(|source| Error::Json {
        path: summary_path.clone(),
        source,
    })?;
    text.push('\n');
    std::fs::write(&summary_path, text).map_err(|e| Error::io(&summary_path, e))?;

    Ok(vec![acc_path, walk_path, summary_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::ModelKind;
    use crate::rng::RngSeed;

    fn row(acc: Option<f64>) -> AccuracyRow {
        AccuracyRow {
            setting: "p_intra=6/100,p_inter=3/900".into(),
            kind: ModelKind::Gcn,
            k: 2,
            self_loops: true,
            run: 0,
            seed: RngSeed(9),
            test_accuracy: acc,
            error: acc.is_none().then(|| "boom".to_string()),
        }
    }

    #[test]
    fn one_row_csv() {
        let mut buf = Vec::new();
        write_accuracies_csv(&[row(Some(0.875))], &mut buf, Path::new("mem")).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "setting,kind,k,self_loops,run,seed,test_accuracy,error\n\
             \"p_intra=6/100,p_inter=3/900\",gcn,2,true,0,9,0.875,\n"
        );
    }

    #[test]
    fn error_rows_have_empty_accuracy() {
        let mut buf = Vec::new();
        write_accuracies_csv(&[row(None)], &mut buf, Path::new("mem")).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with(",9,,boom\n"));
    }

    #[test]
    fn emits_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let results = ExperimentResult {
            accuracies: vec![row(Some(0.5)), row(None)],
            walk_rows: vec![],
        };
        let files = emit_report(&results, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&files[2]).unwrap()).unwrap();
        assert_eq!(summary["cells"][0]["failed_runs"], 1);
        assert_eq!(summary["cells"][0]["stats"]["median"], 0.5);
        assert!(emit_report(&ExperimentResult::default(), dir.path()).is_err());
    }
}
