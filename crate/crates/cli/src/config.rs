//! Flat `key=value` config files. Keys are long flag names; a flag given on
//! the command line wins over the same key in the file.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, Command};

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn takes_value(cmd: &Command, long: &str) -> bool {
    cmd.get_arguments()
        .find(|a| a.get_long() == Some(long))
        .is_some_and(|a| matches!(a.get_action(), ArgAction::Set | ArgAction::Append))
}

/// The (sub)command the arguments select, with the long flags it accepts.
fn selected<'a>(root: &'a Command, args: &[OsString]) -> (&'a Command, Vec<(&'a str, bool)>) {
    let mut cmd = root;
    let mut globals: Vec<(&str, bool)> = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if let Some(long) = s.strip_prefix("--") {
            if !long.contains('=') && takes_value(cmd, long) {
                i += 1;
            }
        } else if let Some(sub) = cmd.find_subcommand(s.as_ref()) {
            globals.extend(cmd.get_arguments().filter(|a| a.is_global_set()).filter_map(|a| a.get_long().map(|l| (l, true))));
            cmd = sub;
        }
        i += 1;
    }
    let mut accepted: Vec<(&str, bool)> = cmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(|l| (l, matches!(a.get_action(), ArgAction::Set | ArgAction::Append))))
        .collect();
    accepted.extend(globals);
    (cmd, accepted)
}

/// Appends flags from the config file that the command line did not set.
pub fn merge(root: &Command, args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let entries = parse(&text)?;
    let (cmd, accepted) = selected(root, &args);
    let mut out = args.clone();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let Some(&(_, with_value)) = accepted.iter().find(|(l, _)| *l == key) else {
            return Err(format!("config key `{key}` is not a flag of `{}`", cmd.get_name()));
        };
        let flag = format!("--{key}");
        let present = args.iter().any(|a| {
            let s = a.to_string_lossy();
            s == flag || s.starts_with(&format!("{flag}="))
        });
        if present {
            continue;
        }
        if with_value {
            out.push(flag.into());
            out.push(value.into());
        } else if value == "true" {
            out.push(flag.into());
        }
    }
    Ok(out)
}
