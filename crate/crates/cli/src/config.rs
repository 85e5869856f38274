//! Config files for the CLI.
//!
//! A config file is a `key=value` text file (see [`KeyValues`]) whose keys are
//! long flag names without the leading dashes; `_` and `-` are interchangeable.
//! `key=true` turns on a bare switch and `key=false` leaves it off. The
//! expanded flags are spliced in right after the subcommand name, ahead of the
//! flags given on the command line, so the command line wins.

use std::path::Path;

use crate::meta::KeyValues;
use crate::Result;

/// Flag that names the config file.
pub const CONFIG_FLAG: &str = "--config";

/// Turns config entries into command-line tokens.
pub fn config_to_args(kv: &KeyValues) -> Vec<String> {
    let mut out = Vec::new();
    for (key, value) in kv.iter() {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            "true" => out.push(flag),
            "false" => {}
            _ => {
                out.push(flag);
                out.push(value.to_string());
            }
        }
    }
    out
}

/// Position of the subcommand in `argv` (index 0 is the program name).
/// `valued` lists global flags that consume the following token.
fn subcommand_index(argv: &[String], valued: &[&str]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].as_str();
        if valued.contains(&tok) {
            i += 2;
        } else if tok.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut iter = argv.iter();
    while let Some(tok) = iter.next() {
        if tok == CONFIG_FLAG {
            return iter.next().cloned();
        }
        if let Some(rest) = tok.strip_prefix("--config=") {
            return Some(rest.to_string());
        }
    }
    None
}

/// Returns `argv` with the contents of the `--config` file, if any, spliced in
/// after the subcommand.
pub fn expand_config_args(argv: Vec<String>, valued_globals: &[&str]) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let extra = config_to_args(&KeyValues::read(Path::new(&path))?);
    let at = subcommand_index(&argv, valued_globals).map_or(argv.len(), |i| i + 1);
    let mut out = argv;
    out.splice(at..at, extra);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn entries_become_flags() {
        let kv = KeyValues::parse("sigma_u = 0.5\nno-timing=true\nverbose=false\n").unwrap();
        assert_eq!(config_to_args(&kv), argv("--no-timing --sigma-u 0.5"));
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "s=40\nworkers=4\n").unwrap();
        let line = format!("dihs --threads 2 --config {} solve --s 80", path.display());
        let out = expand_config_args(argv(&line), &["--threads", CONFIG_FLAG]).unwrap();
        let tail: Vec<&str> = out[6..].iter().map(String::as_str).collect();
        assert_eq!(out[5], "solve");
        assert_eq!(tail, ["--s", "40", "--workers", "4", "--s", "80"]);
    }

    #[test]
    fn no_config_is_identity() {
        let a = argv("dihs solve --s 80");
        assert_eq!(expand_config_args(a.clone(), &[]).unwrap(), a);
    }
}
