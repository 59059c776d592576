//! The `.mmh` trace format.
//!
//! ```text
//! # store buffering
//! init: x=0 y=0
//! thread T0
//! wr x 1
//! rd y 0
//! thread T1
//! wr y 1
//! rd x 0
//! ```
//!
//! Optional `rf <thread>:<pos> -> <thread>:<pos>` lines fix reads-from
//! explicitly (all reads must then be covered); `dp` lines of the same shape
//! add dependency edges.

use std::collections::HashSet;

use super::{EventRef, History, HistoryBuilder, INIT_THREAD};
use crate::error::HistoryError;

pub fn parse_history(text: &str) -> Result<History, HistoryError> {
    let mut b = HistoryBuilder::new();
    let mut seen_init = false;
    let mut in_thread = false;
    let mut names: HashSet<String> = HashSet::new();
    let mut init_vars: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| HistoryError::syntax(line_no, msg);

        if let Some(rest) = line.strip_prefix("init:") {
            if seen_init {
                return Err(err("`init:` given more than once".into()));
            }
            if in_thread {
                return Err(err("`init:` must precede all threads".into()));
            }
            seen_init = true;
            for assign in rest.split_whitespace() {
                let (var, val) = assign
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected <var>=<val>, found `{assign}`")))?;
                check_var(var).map_err(&err)?;
                let val = parse_value(val).map_err(&err)?;
                if !init_vars.insert(var.to_string()) {
                    return Err(err(format!("variable `{var}` initialized twice")));
                }
                b.init(var, val);
            }
            continue;
        }

        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "thread" => {
                let [_, name] = tokens[..] else {
                    return Err(err("expected `thread <name>`".into()));
                };
                check_thread_name(name).map_err(&err)?;
                if !names.insert(name.to_string()) {
                    return Err(err(format!("thread `{name}` declared twice")));
                }
                b.thread(name);
                in_thread = true;
            }
            op @ ("wr" | "rd") => {
                if !in_thread {
                    return Err(err(format!("`{op}` outside of a thread block")));
                }
                let [_, var, val] = tokens[..] else {
                    return Err(err(format!("expected `{op} <var> <val>`")));
                };
                check_var(var).map_err(&err)?;
                let val = parse_value(val).map_err(&err)?;
                if op == "wr" {
                    b.write(var, val);
                } else {
                    b.read(var, val);
                }
            }
            kw @ ("rf" | "dp") => {
                let body = line[kw.len()..].trim();
                let (from, to) = body
                    .split_once("->")
                    .ok_or_else(|| err(format!("expected `{kw} <ref> -> <ref>`")))?;
                let from = parse_event_ref(from.trim()).map_err(&err)?;
                let to = parse_event_ref(to.trim()).map_err(&err)?;
                if kw == "rf" {
                    b.rf(from, to);
                } else {
                    b.dp(from, to);
                }
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    b.build()
}

/// Parses `<thread>:<pos>`.
pub fn parse_event_ref(s: &str) -> Result<EventRef, String> {
    let (thread, pos) = s
        .rsplit_once(':')
        .ok_or_else(|| format!("expected <thread>:<pos>, found `{s}`"))?;
    check_thread_name(thread).or_else(|e| {
        if thread == INIT_THREAD {
            Ok(())
        } else {
            Err(e)
        }
    })?;
    let pos = pos
        .parse::<usize>()
        .map_err(|_| format!("invalid position `{pos}` in `{s}`"))?;
    Ok(EventRef::new(thread, pos))
}

fn parse_value(s: &str) -> Result<u64, String> {
    s.parse::<u64>()
        .map_err(|_| format!("invalid value `{s}` (expected unsigned 64-bit integer)"))
}

fn check_var(s: &str) -> Result<(), String> {
    let mut chars = s.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(format!("invalid variable name `{s}`"))
    }
}

fn check_thread_name(s: &str) -> Result<(), String> {
    if s == INIT_THREAD {
        return Err("thread name `init` is reserved".into());
    }
    let ok = !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '.' | '-'));
    if ok {
        Ok(())
    } else {
        Err(format!("invalid thread name `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::EventId;

    const SB: &str = "\
# store buffering
init: x=0 y=0
thread T0
wr x 1
rd y 0
thread T1
wr y 1
rd x 0
";

    #[test]
    fn empty_document() {
        let h = parse_history("").unwrap();
        assert_eq!((h.n(), h.k()), (0, 0));
        let h = parse_history("# only a comment\n\n").unwrap();
        assert_eq!(h.n(), 0);
    }

    #[test]
    fn parses_store_buffering() {
        let h = parse_history(SB).unwrap();
        assert_eq!((h.n(), h.k()), (6, 4));
        assert_eq!(h.threads(), &["init", "T0", "T1"]);
        // init x, init y, T0:0, T0:1, T1:0, T1:1
        assert_eq!(h.source_of(EventId(3)), Some(EventId(1)));
        assert_eq!(h.source_of(EventId(5)), Some(EventId(0)));
        assert_eq!(
            h.to_trace(),
            SB.lines()
                .skip(1)
                .map(|l| format!("{l}\n"))
                .collect::<String>()
        );
    }

    #[test]
    fn cross_thread_rf() {
        let h = parse_history("thread T0\nwr x 1\nthread T1\nrd x 1\n").unwrap();
        assert_eq!(
            h.rf().iter().collect::<Vec<_>>(),
            vec![(EventId(0), EventId(1))]
        );
        assert!(h.po().is_empty());
    }

    #[test]
    fn duplicate_value() {
        let err = parse_history("thread T0\nwr x 1\nwr x 1\n").unwrap_err();
        assert!(matches!(err, HistoryError::DuplicateValue { .. }));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_history("thread T0\nwr x\n").unwrap_err();
        assert_eq!(err, HistoryError::syntax(2, "expected `wr <var> <val>`"));
        let err = parse_history("wr x 1\n").unwrap_err();
        assert!(matches!(err, HistoryError::Syntax { line: 1, .. }));
        let err = parse_history("thread T0\nwr x -1\n").unwrap_err();
        assert!(matches!(err, HistoryError::Syntax { line: 2, .. }));
        let err = parse_history("thread T0\nthread T0\n").unwrap_err();
        assert!(matches!(err, HistoryError::Syntax { line: 2, .. }));
        let err = parse_history("thread T0\ninit: x=0\n").unwrap_err();
        assert!(matches!(err, HistoryError::Syntax { line: 2, .. }));
        let err = parse_history("fence\n").unwrap_err();
        assert!(matches!(err, HistoryError::Syntax { line: 1, .. }));
    }

    #[test]
    fn explicit_rf_and_dp_lines() {
        let text = "\
init: x=0
thread T0
rd x 0
wr y 1
rf init:0 -> T0:0
dp T0:0 -> T0:1
";
        let h = parse_history(text).unwrap();
        assert!(h.explicit_rf());
        assert_eq!(h.dp().len(), 1);
        assert_eq!(h.to_trace(), text);
    }

    #[test]
    fn dangling_reference() {
        let err =
            parse_history("thread T0\nwr x 1\nthread T1\nrd x 1\nrf T0:5 -> T1:0\n").unwrap_err();
        assert!(matches!(err, HistoryError::DanglingRef { .. }));
    }

    #[test]
    fn rf_contradicting_variables() {
        let text = "thread T0\nwr x 1\nwr y 1\nthread T1\nrd x 1\nrf T0:1 -> T1:0\n";
        assert!(matches!(
            parse_history(text).unwrap_err(),
            HistoryError::AmbiguousRf { .. }
        ));
    }

    #[test]
    fn event_refs() {
        assert_eq!(parse_event_ref("T0:3").unwrap(), EventRef::new("T0", 3));
        assert_eq!(parse_event_ref("init:0").unwrap(), EventRef::new("init", 0));
        assert!(parse_event_ref("T0").is_err());
        assert!(parse_event_ref("T0:x").is_err());
    }
}
