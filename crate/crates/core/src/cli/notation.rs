//! Compact text form of eventually periodic action sequences.
//!
//! Items are comma separated. An item is an action name, optionally followed
//! by a repeat count (`w9`), or a parenthesized group with an optional count.
//! A `*` after an item starts the cycle, which runs to the end of the text;
//! without a `*` the sequence is finite. `p,w*` is one play then work forever,
//! `p4,(p,w9)*` four plays then play-every-ten forever.

use super::CliError;
use crate::model::Action;

/// Prefix and cycle actions; an empty cycle means a finite sequence.
pub type ActionParts = (Vec<Action>, Vec<Action>);

pub fn parse_actions(text: &str, names: &[String]) -> Result<ActionParts, CliError> {
    let mut parser = Parser { chars: text.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, names, star: None };
    let mut out = Vec::new();
    parser.sequence(&mut out)?;
    if parser.pos != parser.chars.len() {
        return Err(CliError::token(format!("unexpected `{}` in trajectory", parser.chars[parser.pos])));
    }
    if out.is_empty() {
        return Err(CliError::token("empty trajectory"));
    }
    Ok(match parser.star {
        Some(at) => {
            let cycle = out.split_off(at);
            (out, cycle)
        }
        None => (out, Vec::new()),
    })
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    names: &'a [String],
    /// Output index where the cycle begins.
    star: Option<usize>,
}

fn is_special(c: char) -> bool {
    matches!(c, '(' | ')' | ',' | '*')
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sequence(&mut self, out: &mut Vec<Action>) -> Result<(), CliError> {
        loop {
            self.item(out)?;
            if self.peek() == Some(',') {
                self.pos += 1;
            } else {
                return Ok(());
            }
        }
    }

    fn item(&mut self, out: &mut Vec<Action>) -> Result<(), CliError> {
        let begin = out.len();
        if self.peek() == Some('(') {
            self.pos += 1;
            let mut group = Vec::new();
            self.sequence(&mut group)?;
            if self.peek() != Some(')') {
                return Err(CliError::token("unbalanced `(` in trajectory"));
            }
            self.pos += 1;
            let count = self.count()?.unwrap_or(1);
            for _ in 0..count {
                out.extend(&group);
            }
        } else {
            let start = self.pos;
            while self.peek().is_some_and(|c| !is_special(c)) {
                self.pos += 1;
            }
            let token: String = self.chars[start..self.pos].iter().collect();
            let (action, count) = self.resolve(&token)?;
            out.extend(std::iter::repeat_n(action, count));
        }
        if self.peek() == Some('*') {
            self.pos += 1;
            if self.star.is_some() {
                return Err(CliError::token("more than one `*` in trajectory"));
            }
            self.star = Some(begin);
        }
        Ok(())
    }

    fn count(&mut self) -> Result<Option<usize>, CliError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        match digits.parse::<usize>() {
            Ok(0) | Err(_) => Err(CliError::token(format!("bad repeat count `{digits}`"))),
            Ok(n) => Ok(Some(n)),
        }
    }

    /// A whole action name, or an action name followed by a repeat count.
    fn resolve(&self, token: &str) -> Result<(Action, usize), CliError> {
        if token.is_empty() {
            return Err(CliError::token("missing action name in trajectory"));
        }
        if let Some(a) = self.names.iter().position(|n| n == token) {
            return Ok((a, 1));
        }
        let base = token.trim_end_matches(|c: char| c.is_ascii_digit());
        if let Some(a) = self.names.iter().position(|n| n == base) {
            return match token[base.len()..].parse::<usize>() {
                Ok(n) if n > 0 => Ok((a, n)),
                _ => Err(CliError::token(format!("bad repeat count in `{token}`"))),
            };
        }
        Err(CliError::token(format!("unknown trajectory token `{token}`")))
    }
}

/// Inverse of [`parse_actions`] with runs compressed where unambiguous.
pub fn render_actions(prefix: &[Action], cycle: &[Action], names: &[String]) -> String {
    let mut parts = runs(prefix, names);
    let cycle_tokens = runs(cycle, names);
    match cycle_tokens.len() {
        0 => {}
        1 => parts.push(format!("{}*", cycle_tokens[0])),
        _ => parts.push(format!("({})*", cycle_tokens.join(","))),
    }
    parts.join(",")
}

fn runs(seq: &[Action], names: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < seq.len() {
        let a = seq[i];
        let mut j = i;
        while j < seq.len() && seq[j] == a {
            j += 1;
        }
        let name = &names[a];
        let count = j - i;
        let compressed = format!("{name}{count}");
        let ambiguous = name.ends_with(|c: char| c.is_ascii_digit()) || names.contains(&compressed);
        if count == 1 {
            out.push(name.clone());
        } else if ambiguous {
            out.extend(std::iter::repeat_n(name.clone(), count));
        } else {
            out.push(compressed);
        }
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp() -> Vec<String> {
        vec!["w".into(), "p".into()]
    }

    #[test]
    fn play_then_work_forever() {
        assert_eq!(parse_actions("p,w*", &wp()).unwrap(), (vec![1], vec![0]));
        assert_eq!(render_actions(&[1], &[0], &wp()), "p,w*");
    }

    #[test]
    fn grouped_cycle_with_counts() {
        let (prefix, cycle) = parse_actions("p,p,p,p,p,(w9,p)*", &wp()).unwrap();
        assert_eq!(prefix, vec![1; 5]);
        assert_eq!(cycle.len(), 10);
        assert_eq!(cycle[9], 1);
        assert_eq!(render_actions(&prefix, &cycle, &wp()), "p5,(w9,p)*");
        assert_eq!(parse_actions("p5,(w9,p)*", &wp()).unwrap(), (prefix, cycle));
    }

    #[test]
    fn finite_sequences_and_group_counts() {
        assert_eq!(parse_actions("(p,w)2", &wp()).unwrap(), (vec![1, 0, 1, 0], vec![]));
        assert_eq!(render_actions(&[1, 0, 0], &[], &wp()), "p,w2");
    }

    #[test]
    fn errors_are_token_errors() {
        for bad in ["", "x", "p,,w", "(p,w", "p*,w*", "w0", "p)"] {
            let err = parse_actions(bad, &wp()).unwrap_err();
            assert_eq!(err.code, 4, "{bad}");
        }
    }

    #[test]
    fn digit_names_are_not_compressed() {
        let names = vec!["a1".to_string(), "b".to_string()];
        assert_eq!(render_actions(&[0, 0], &[1], &names), "a1,a1,b*");
        assert_eq!(parse_actions("a1,a1,b*", &names).unwrap(), (vec![0, 0], vec![1]));
    }
}
