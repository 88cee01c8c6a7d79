//! Gold corpus loaders: the Inspec directory layout and a JSONL schema.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

use super::EvalError;

/// A document with its gold keyphrases, normalized to lowercase with
/// collapsed internal whitespace and duplicates removed.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldDocument {
    pub doc_id: String,
    pub text: String,
    pub gold: BTreeSet<String>,
}

impl GoldDocument {
    pub fn new(doc_id: &str, text: &str, gold: &[&str]) -> GoldDocument {
        GoldDocument {
            doc_id: doc_id.to_string(),
            text: text.to_string(),
            gold: gold.iter().filter_map(|p| normalize_phrase(p)).collect(),
        }
    }
}

/// Lowercase and collapse internal whitespace; `None` for blank phrases.
pub fn normalize_phrase(phrase: &str) -> Option<String> {
    let collapsed = phrase
        .split_whitespace()
        .collect::<Vec<&str>>()
        .join(" ")
        .to_lowercase();
    if collapsed.is_empty() {
        None
    } else {
        Some(collapsed)
    }
}

/// Split a keyphrase file's content into normalized phrases. Entries are
/// separated by semicolons and newlines.
fn parse_keyphrase_file(content: &str) -> impl Iterator<Item = String> + '_ {
    content.split([';', '\n']).filter_map(normalize_phrase)
}

/// Load an Inspec-style directory: one `<id>.abstr` text file per document
/// plus `<id>.uncontr` and/or `<id>.contr` keyphrase files. The gold set is
/// the union of both keyphrase files.
///
/// The directory is scanned recursively and documents are returned sorted by
/// id. An abstract with no keyphrase file at all (or whose keyphrases
/// normalize to nothing) is a [`EvalError::MissingGold`].
pub fn load_inspec(dir_path: &Path) -> Result<Vec<GoldDocument>, EvalError> {
    if !dir_path.is_dir() {
        return Err(EvalError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} is not a directory", dir_path.display()),
        )));
    }

    let mut abstracts: Vec<std::path::PathBuf> = walkdir::WalkDir::new(dir_path)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "abstr"))
        .collect();
    abstracts.sort();

    let mut documents = Vec::with_capacity(abstracts.len());
    for abstr in abstracts {
        let doc_id = abstr
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let text = std::fs::read_to_string(&abstr)?;

        let mut gold = BTreeSet::new();
        let mut saw_gold_file = false;
        for ext in ["uncontr", "contr"] {
            let path = abstr.with_extension(ext);
            if path.is_file() {
                saw_gold_file = true;
                gold.extend(parse_keyphrase_file(&std::fs::read_to_string(&path)?));
            }
        }
        if !saw_gold_file || gold.is_empty() {
            return Err(EvalError::MissingGold(doc_id));
        }
        documents.push(GoldDocument {
            doc_id,
            text,
            gold,
        });
    }
    Ok(documents)
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: String,
    text: String,
    keyphrases: Vec<String>,
}

/// Load a JSONL corpus: one `{"id", "text", "keyphrases"}` object per line.
/// Blank lines are skipped; anything else that fails to parse is a
/// [`EvalError::MalformedLine`] with its 1-based line number.
pub fn load_jsonl(path: &Path) -> Result<Vec<GoldDocument>, EvalError> {
    let content = std::fs::read_to_string(path)?;
    load_jsonl_str(&content)
}

pub fn load_jsonl_str(content: &str) -> Result<Vec<GoldDocument>, EvalError> {
    let mut documents = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonlRecord =
            serde_json::from_str(line).map_err(|_| EvalError::MalformedLine(idx + 1))?;
        let gold: BTreeSet<String> = record
            .keyphrases
            .iter()
            .filter_map(|p| normalize_phrase(p))
            .collect();
        // A gold set that normalizes to nothing cannot be evaluated against.
        if gold.is_empty() {
            return Err(EvalError::MalformedLine(idx + 1));
        }
        documents.push(GoldDocument {
            doc_id: record.id,
            text: record.text,
            gold,
        });
    }
    Ok(documents)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_lowercases_and_collapses() {
        assert_eq!(
            normalize_phrase("  Neural   Networks "),
            Some("neural networks".to_string())
        );
        assert_eq!(normalize_phrase("   "), None);
    }

    #[test]
    fn inspec_directory_with_one_document() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("42.abstr"), "Some text about control.").unwrap();
        std::fs::write(dir.path().join("42.uncontr"), "Neural Networks; control").unwrap();
        let docs = load_inspec(dir.path()).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].doc_id, "42");
        let gold: Vec<&str> = docs[0].gold.iter().map(String::as_str).collect();
        assert_eq!(gold, vec!["control", "neural networks"]);
    }

    #[test]
    fn inspec_union_of_controlled_and_uncontrolled() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("7.abstr"), "text").unwrap();
        std::fs::write(dir.path().join("7.uncontr"), "alpha; beta").unwrap();
        std::fs::write(dir.path().join("7.contr"), "beta;\ngamma").unwrap();
        let docs = load_inspec(dir.path()).unwrap();
        let gold: Vec<&str> = docs[0].gold.iter().map(String::as_str).collect();
        assert_eq!(gold, vec!["alpha", "beta", "gamma"]);
    }

    #[test]
    fn abstract_without_gold_is_missing_gold() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("9.abstr"), "text").unwrap();
        match load_inspec(dir.path()) {
            Err(EvalError::MissingGold(id)) => assert_eq!(id, "9"),
            other => panic!("expected MissingGold, got {other:?}"),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let docs = load_jsonl_str(
            "{\"id\":\"a\",\"text\":\"t\",\"keyphrases\":[\"Neural Networks\"]}\n",
        )
        .unwrap();
        assert_eq!(docs.len(), 1);
        assert!(docs[0].gold.contains("neural networks"));
    }

    #[test]
    fn jsonl_empty_gold_is_malformed() {
        let content = "{\"id\":\"a\",\"text\":\"t\",\"keyphrases\":[\"  \"]}\n";
        assert!(matches!(
            load_jsonl_str(content),
            Err(EvalError::MalformedLine(1))
        ));
    }

    #[test]
    fn jsonl_empty_file_is_empty_corpus() {
        assert!(load_jsonl_str("").unwrap().is_empty());
    }

    #[test]
    fn jsonl_missing_field_reports_line() {
        let content =
            "{\"id\":\"a\",\"text\":\"t\",\"keyphrases\":[\"x\"]}\n{\"id\":\"b\",\"keyphrases\":[\"x\"]}\n";
        match load_jsonl_str(content) {
            Err(EvalError::MalformedLine(line)) => assert_eq!(line, 2),
            other => panic!("expected MalformedLine, got {other:?}"),
        }
    }
}
