//! CoNLL-U ingestion for pre-tagged documents and training corpora.
//!
//! Only the FORM and XPOS columns are consumed; XPOS is expected to carry
//! Penn-style tags. Documents are delimited by `# newdoc id = <id>` comments.

use super::{PosTag, TaggedDocument, TaggedSentence, TextpipeError, Token};

/// A parsed token line: (form, xpos).
fn parse_token_line(line: &str, line_no: usize) -> Result<Option<(String, String)>, TextpipeError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(TextpipeError::MalformedConllu(line_no));
    }
    // Multiword-token ranges (1-2) and empty nodes (1.1) duplicate the word
    // lines that follow; skip them.
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    Ok(Some((cols[1].to_string(), cols[4].to_string())))
}

fn newdoc_id(line: &str) -> Option<String> {
    let rest = line.strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix("newdoc")?.trim_start();
    let rest = rest.strip_prefix("id")?.trim_start();
    let rest = rest.strip_prefix('=')?;
    Some(rest.trim().to_string())
}

/// Parse CoNLL-U content into tagged documents.
///
/// Character offsets are synthesized by joining forms with single spaces,
/// except that no space is placed on either side of a token whose XPOS is
/// `HYPH`. Unknown XPOS values map to the coarse tag `OTHER` through the
/// canonical mapping.
pub fn load_conllu(content: &str) -> Result<Vec<TaggedDocument>, TextpipeError> {
    let mut docs: Vec<(String, Vec<(String, String)>)> = Vec::new();
    let mut saw_marker = false;

    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(id) = newdoc_id(line) {
                docs.push((id, Vec::new()));
                saw_marker = true;
            }
            continue;
        }
        if let Some(pair) = parse_token_line(line, line_no)? {
            if !saw_marker && docs.is_empty() {
                // Token lines before any marker form an implicit document.
                docs.push(("doc0".to_string(), Vec::new()));
            }
            docs.last_mut().expect("document exists").1.push(pair);
        }
    }

    Ok(docs
        .into_iter()
        .map(|(doc_id, forms)| assemble_document(doc_id, &forms))
        .collect())
}

/// Parse CoNLL-U content into training sentences (blank-line separated).
pub fn load_conllu_sentences(content: &str) -> Result<Vec<TaggedSentence>, TextpipeError> {
    let mut sentences = Vec::new();
    let mut current: TaggedSentence = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some(pair) = parse_token_line(line, line_no)? {
            current.push(pair);
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

fn assemble_document(doc_id: String, forms: &[(String, String)]) -> TaggedDocument {
    let mut text = String::new();
    let mut char_len = 0usize;
    let mut tokens = Vec::with_capacity(forms.len());
    let mut prev_was_hyph = false;

    for (form, xpos) in forms {
        let is_hyph_tag = xpos == "HYPH";
        if !text.is_empty() && !is_hyph_tag && !prev_was_hyph {
            text.push(' ');
            char_len += 1;
        }
        let start = char_len;
        text.push_str(form);
        char_len += form.chars().count();
        tokens.push((Token::new(form.clone(), start, char_len), PosTag::new(xpos)));
        prev_was_hyph = is_hyph_tag;
    }

    TaggedDocument {
        doc_id,
        text,
        tokens,
    }
}
