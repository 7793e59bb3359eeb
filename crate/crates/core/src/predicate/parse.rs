use crate::error::{Error, Result};

/// A parsed `name(arg, ...)` predicate reference from a config document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub name: String,
    pub args: Vec<String>,
}

impl Call {
    pub fn int_arg(&self, idx: usize) -> Result<i64> {
        let raw = self.args.get(idx).ok_or_else(|| {
            Error::Predicate(format!("{}: missing argument {}", self.name, idx + 1))
        })?;
        raw.parse()
            .map_err(|_| Error::Predicate(format!("{}: `{raw}` is not an integer", self.name)))
    }

    pub fn expect_arity(&self, arity: usize) -> Result<()> {
        if self.args.len() == arity {
            Ok(())
        } else {
            Err(Error::Predicate(format!(
                "{} takes {arity} argument(s), got {}",
                self.name,
                self.args.len()
            )))
        }
    }
}

/// Parses `name`, `name()` or `name(a, b)`.
pub fn parse_call(text: &str) -> Result<Call> {
    let text = text.trim();
    let (name, args) = match text.find('(') {
        None => (text, Vec::new()),
        Some(open) => {
            let inner = text[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Predicate(format!("unbalanced parentheses in `{text}`")))?;
            let args = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|a| a.trim().to_string()).collect()
            };
            (&text[..open], args)
        }
    };
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Error::Predicate(format!(
            "invalid predicate name in `{text}`"
        )));
    }
    Ok(Call {
        name: name.to_string(),
        args,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_calls() {
        let c = parse_call("logCommitDiff(3)").unwrap();
        assert_eq!(c.name, "logCommitDiff");
        assert_eq!(c.int_arg(0).unwrap(), 3);
        let c = parse_call(" processInRoleTerm( leader , 2 ) ").unwrap();
        assert_eq!(c.args, vec!["leader", "2"]);
        assert!(parse_call("oneLeaderOneCandidate").unwrap().args.is_empty());
        assert!(parse_call("oneLeaderOneCandidate()")
            .unwrap()
            .args
            .is_empty());
        assert!(parse_call("bad(1").is_err());
        assert!(parse_call("(1)").is_err());
    }
}
