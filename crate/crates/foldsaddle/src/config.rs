//! Line-oriented `key = value` configuration files.
//!
//! Entries become long flags placed ahead of the command-line flags, so a
//! flag given on the command line overrides the file.

use std::ffi::OsString;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("`--config` needs a path")]
    MissingPath,
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: n + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line: n + 1 });
        }
        out.push((k.replace('_', "-"), v.to_string()));
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse(&text)
}

fn entry_flags(entries: &[(String, String)]) -> Vec<OsString> {
    let mut out = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}").into()),
            "false" => {}
            _ => out.push(format!("--{k}={v}").into()),
        }
    }
    out
}

/// Removes `--config <path>` from `argv` and splices the file's entries in
/// right after the subcommand name.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = Some(it.next().ok_or(ConfigError::MissingPath)?);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let flags = entry_flags(&load(Path::new(&path))?);
    // argv[0] is the program, argv[1] the subcommand.
    let at = rest.len().min(2);
    rest.splice(at..at, flags);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blanks() {
        let e = parse("# header\n\ntau = inv  # trailing\nlambda=-0.2\n").unwrap();
        assert_eq!(e, vec![("tau".into(), "inv".into()), ("lambda".into(), "-0.2".into())]);
    }

    #[test]
    fn bad_line() {
        assert!(matches!(parse("tau inv"), Err(ConfigError::Syntax { line: 1 })));
    }

    #[test]
    fn splice_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("fs-config-{}", std::process::id()));
        std::fs::write(&dir, "beta = 0.5\nlambda_min = -1\n").unwrap();
        let argv: Vec<OsString> = ["prog", "classify", "--config", dir.to_str().unwrap(), "--beta", "0.2"]
            .iter()
            .map(OsString::from)
            .collect();
        let got = expand(argv).unwrap();
        let got: Vec<_> = got.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(got, ["prog", "classify", "--beta=0.5", "--lambda-min=-1", "--beta", "0.2"]);
        std::fs::remove_file(dir).ok();
    }
}
