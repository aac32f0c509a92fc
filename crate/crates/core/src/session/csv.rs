//! RFC 4180 CSV rendering of a session transcript.

use super::ChatTurn;

pub const HEADER: &str = "turn_index,timestamp,role,content,citations";
pub const CITATION_SEPARATOR: char = ';';

/// Header plus one CRLF-terminated row per turn, in turn order.
pub fn render(turns: &[ChatTurn]) -> Vec<u8> {
    let mut out = String::with_capacity(HEADER.len() + 2 + turns.len() * 128);
    out.push_str(HEADER);
    out.push_str("\r\n");
    for turn in turns {
        let citations = turn.citations.join(&CITATION_SEPARATOR.to_string());
        let fields = [
            turn.turn_index.to_string(),
            turn.timestamp.clone(),
            turn.role.as_str().to_string(),
            turn.content.clone(),
            citations,
        ];
        for (i, field) in fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_field(&mut out, field);
        }
        out.push_str("\r\n");
    }
    out.into_bytes()
}

/// Quotes fields containing a comma, quote, CR or LF; inner quotes double.
fn push_field(out: &mut String, field: &str) {
    if field.contains([',', '"', '\n', '\r']) {
        out.push('"');
        out.push_str(&field.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(field);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::TurnRole;

    fn turn(i: u64, role: TurnRole, content: &str, citations: &[&str]) -> ChatTurn {
        ChatTurn {
            turn_index: i,
            role,
            content: content.into(),
            timestamp: "2026-01-02T03:04:05.678Z".into(),
            citations: citations.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn empty_session_is_header_only() {
        assert_eq!(render(&[]), b"turn_index,timestamp,role,content,citations\r\n");
    }

    #[test]
    fn quotes_are_doubled() {
        let csv = String::from_utf8(render(&[turn(0, TurnRole::User, r#"say "hi", please"#, &[])])).unwrap();
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            r#"0,2026-01-02T03:04:05.678Z,user,"say ""hi"", please","#
        );
    }

    #[test]
    fn citations_joined_and_newlines_quoted() {
        let csv = String::from_utf8(render(&[
            turn(0, TurnRole::User, "q", &[]),
            turn(1, TurnRole::Assistant, "line1\nline2", &["A#0", "B#2"]),
        ]))
        .unwrap();
        assert!(csv.ends_with("1,2026-01-02T03:04:05.678Z,assistant,\"line1\nline2\",A#0;B#2\r\n"));
    }
}
