//! Tab-separated triples: `head<TAB>relation<TAB>tail` per line,
//! `#pin<TAB>label` to keep an isolated entity. Blank lines and other lines
//! starting with `#` are ignored.

use super::{KgError, KnowledgeGraph, Triple};

/// Parses the text form into a canonical graph.
pub fn parse_tsv(text: &str) -> Result<KnowledgeGraph, KgError> {
    let mut triples = Vec::new();
    let mut pins = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let fail = |reason: &str| KgError::Text {
            line: i + 1,
            reason: reason.to_string(),
        };
        if line.trim().is_empty() {
            continue;
        }
        if let Some(label) = line.strip_prefix("#pin\t") {
            if label.is_empty() || label.contains('\t') {
                return Err(fail("expected `#pin<TAB>label`"));
            }
            pins.push(label.to_string());
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [h, r, t] = fields[..] else {
            return Err(fail("expected three tab-separated fields"));
        };
        if h.is_empty() || r.is_empty() || t.is_empty() {
            return Err(fail("empty label"));
        }
        triples.push(Triple::new(h, r, t));
    }
    let mut entities: Vec<String> = triples
        .iter()
        .flat_map(|t| [t.head.clone(), t.tail.clone()])
        .collect();
    entities.extend(pins.iter().cloned());
    let relations = triples.iter().map(|t| t.relation.clone()).collect();
    KnowledgeGraph::new(entities, relations, triples, pins).canonicalize()
}

pub fn to_tsv(g: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for p in g.pinned() {
        out.push_str("#pin\t");
        out.push_str(p);
        out.push('\n');
    }
    for t in g.triples() {
        out.push_str(&format!("{}\t{}\t{}\n", t.head, t.relation, t.tail));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text =
            "# comment\ncat\teats\tfish\n\n#pin\tghost\ncat\teats\tfish\r\ndog\tchases\tcat\n";
        let g = parse_tsv(text).unwrap();
        assert_eq!(g.triples().len(), 2);
        assert_eq!(g.pinned(), &["ghost".to_string()]);
        assert_eq!(parse_tsv(&to_tsv(&g)).unwrap(), g);
    }

    #[test]
    fn bad_lines() {
        assert!(matches!(
            parse_tsv("a\tb\n"),
            Err(KgError::Text { line: 1, .. })
        ));
        assert!(matches!(
            parse_tsv("x\ty\tz\na\t\tb\n"),
            Err(KgError::Text { line: 2, .. })
        ));
        assert!(matches!(
            parse_tsv("#pin\t\n"),
            Err(KgError::Text { line: 1, .. })
        ));
    }
}
