//! Labeled-dataset ingestion (`text<TAB>label` TSV) and fold export.

use std::fs;
use std::path::Path;

use subtext_core::corpus::{normalize_text, CorpusError, LabeledDataset, SplitSpec};

#[derive(Debug, thiserror::Error)]
pub enum DatasetIoError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `text<TAB>label`")]
    MalformedLine { line: usize },
    #[error("line {line}: empty label")]
    EmptyLabel { line: usize },
    #[error("line {line}: text is empty after normalization")]
    EmptyText { line: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn read_error(path: &Path, source: std::io::Error) -> DatasetIoError {
    DatasetIoError::Read {
        path: path.display().to_string(),
        source,
    }
}

/// Loads a two-column TSV of `text<TAB>label` lines. Text is normalized
/// before storage, extra tab-separated fields are ignored, and error line
/// numbers are 1-based positions in the file (header included).
pub fn load_dataset(
    path: &Path,
    has_header: bool,
    tweet_mode: bool,
) -> Result<LabeledDataset, DatasetIoError> {
    let raw = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if has_header && idx == 0 {
            continue;
        }
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        let Some((text, rest)) = line.split_once('\t') else {
            return Err(DatasetIoError::MalformedLine { line: line_no });
        };
        let label = rest.split('\t').next().unwrap_or(rest);
        if label.is_empty() {
            return Err(DatasetIoError::EmptyLabel { line: line_no });
        }
        let text = normalize_text(text, tweet_mode);
        if text.is_empty() {
            return Err(DatasetIoError::EmptyText { line: line_no });
        }
        pairs.push((text, label.to_string()));
    }
    Ok(LabeledDataset::new(pairs)?)
}

/// Reads a plain text file as one document per line; if a line contains a
/// tab, only the text before the first tab is kept, so labeled TSV files
/// are accepted wherever raw text is. No normalization is applied.
pub fn load_text_lines(path: &Path, has_header: bool) -> Result<Vec<String>, DatasetIoError> {
    let raw = fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    Ok(raw
        .lines()
        .skip(usize::from(has_header))
        .map(|line| {
            let line = line.strip_suffix('\r').unwrap_or(line);
            let text = line.split('\t').next().unwrap_or(line);
            text.to_string()
        })
        .collect())
}

/// Writes a fold partition: header `k=<k> seed=<seed>`, then one line of
/// comma-separated document ids per fold.
pub fn save_splits(path: &Path, spec: &SplitSpec) -> Result<(), DatasetIoError> {
    let mut out = format!("k={} seed={}\n", spec.k, spec.seed);
    for fold in &spec.folds {
        let ids: Vec<String> = fold.iter().map(|id| id.to_string()).collect();
        out.push_str(&ids.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| DatasetIoError::Write {
        path: path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_documents_in_file_order_with_first_appearance_labels() {
        let f = temp_file("good day\tnone\nyou idiot\tattack\n");
        let ds = load_dataset(f.path(), false, false).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels, vec!["none".to_string(), "attack".to_string()]);
        assert_eq!(ds.documents[0].text, "good day");
        assert_eq!(ds.documents[1].text, "you idiot");
        assert_eq!(ds.label_ids, vec![0, 1]);
    }

    #[test]
    fn header_line_is_skipped_when_requested() {
        let f = temp_file("text\tlabel\nhi there\tnone\n");
        let ds = load_dataset(f.path(), true, false).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.labels, vec!["none".to_string()]);
    }

    #[test]
    fn extra_tab_fields_are_ignored() {
        let f = temp_file("hi\tnone\textra\tstuff\n");
        let ds = load_dataset(f.path(), false, false).unwrap();
        assert_eq!(ds.documents[0].text, "hi");
        assert_eq!(ds.documents[0].label, "none");
    }

    #[test]
    fn missing_tab_reports_the_file_line() {
        let f = temp_file("a\tx\nb\tx\nabc\n");
        let err = load_dataset(f.path(), false, false).unwrap_err();
        assert!(matches!(err, DatasetIoError::MalformedLine { line: 3 }));
    }

    #[test]
    fn empty_file_is_rejected_as_no_documents() {
        let f = temp_file("");
        let err = load_dataset(f.path(), false, false).unwrap_err();
        assert_eq!(err.to_string(), "no documents");

        let header_only = temp_file("text\tlabel\n");
        let err = load_dataset(header_only.path(), true, false).unwrap_err();
        assert_eq!(err.to_string(), "no documents");
    }

    #[test]
    fn text_that_normalizes_to_nothing_reports_the_line() {
        let f = temp_file("ok\tx\n   \tx\n");
        let err = load_dataset(f.path(), false, false).unwrap_err();
        assert!(matches!(err, DatasetIoError::EmptyText { line: 2 }));
    }

    #[test]
    fn empty_label_reports_the_line() {
        let f = temp_file("ok\t\n");
        let err = load_dataset(f.path(), false, false).unwrap_err();
        assert!(matches!(err, DatasetIoError::EmptyLabel { line: 1 }));
    }

    #[test]
    fn crlf_lines_load_cleanly() {
        let f = temp_file("good day\tnone\r\nbad day\tattack\r\n");
        let ds = load_dataset(f.path(), false, false).unwrap();
        assert_eq!(ds.documents[1].label, "attack");
    }

    #[test]
    fn loading_normalizes_but_preserves_count_and_label_multiset() {
        let f = temp_file("Good   DAY\tnone\n@Bob HI\tattack\nFine.\tnone\n");
        let ds = load_dataset(f.path(), false, true).unwrap();
        assert_eq!(ds.len(), 3);
        let mut labels: Vec<&str> = ds.documents.iter().map(|d| d.label.as_str()).collect();
        labels.sort_unstable();
        assert_eq!(labels, vec!["attack", "none", "none"]);
        assert_eq!(ds.documents[0].text, "good day");
        assert_eq!(ds.documents[1].text, "<user> hi");
    }

    #[test]
    fn text_lines_keep_only_the_field_before_the_first_tab() {
        let f = temp_file("plain line\nwith\tlabel\n");
        let lines = load_text_lines(f.path(), false).unwrap();
        assert_eq!(lines, vec!["plain line".to_string(), "with".to_string()]);
    }

    #[test]
    fn splits_file_has_header_and_one_fold_per_line() {
        let spec = SplitSpec {
            k: 2,
            seed: 7,
            folds: vec![vec![0, 2], vec![1, 3]],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("splits.txt");
        save_splits(&path, &spec).unwrap();
        let written = fs::read_to_string(&path).unwrap();
        assert_eq!(written, "k=2 seed=7\n0,2\n1,3\n");
    }
}
