//! `key = value` config files merged underneath command-line flags.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{ArgMatches, Command};

/// One `key = value` pair with the line it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, found `{line}`", i + 1);
        };
        let key = key.trim().trim_start_matches("--").to_string();
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            bail!("line {}: empty key", i + 1);
        }
        out.push(Entry { line: i + 1, key, value });
    }
    Ok(out)
}

/// Value of `--config` in raw arguments, if any.
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

/// Position of the subcommand name in `args` (after the program name).
fn subcommand_position(cmd: &Command, args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s.starts_with('-') {
            let takes_value = !s.contains('=')
                && cmd
                    .get_arguments()
                    .find(|a| a.get_long().is_some_and(|l| s == format!("--{l}")))
                    .is_some_and(|a| a.get_action().takes_values());
            i += if takes_value { 2 } else { 1 };
            continue;
        }
        return cmd.find_subcommand(&*s).map(|_| i);
    }
    None
}

/// Rewrites the argument list so that config-file entries come first and
/// explicit flags, appearing later, override them.
pub fn merge_args(cmd: &Command, args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
    let entries = parse(&text).with_context(|| format!("in config file {}", path.display()))?;

    let (sub_name, user_rest): (String, Vec<OsString>) = match subcommand_position(cmd, &args) {
        Some(pos) => {
            let mut rest: Vec<OsString> = args[1..pos].to_vec();
            rest.extend_from_slice(&args[pos + 1..]);
            (args[pos].to_string_lossy().into_owned(), rest)
        }
        None => match entries.iter().find(|e| e.key == "command") {
            Some(e) => (e.value.clone(), args[1..].to_vec()),
            None => return Ok(args),
        },
    };
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        bail!("config file {}: unknown command `{sub_name}`", path.display());
    };

    let mut merged: Vec<OsString> = vec![args[0].clone(), sub_name.clone().into()];
    for e in entries.iter().filter(|e| e.key != "command" && e.key != "config") {
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(e.key.as_str()));
        let Some(arg) = arg else {
            bail!(
                "config file {} line {}: `{}` is not a flag of `{sub_name}`",
                path.display(),
                e.line,
                e.key
            );
        };
        if arg.get_action().takes_values() {
            merged.push(format!("--{}", e.key).into());
            merged.push(e.value.clone().into());
        } else {
            match e.value.as_str() {
                "true" | "yes" | "1" => merged.push(format!("--{}", e.key).into()),
                "false" | "no" | "0" => {}
                other => bail!(
                    "config file {} line {}: `{}` is a switch, expected true or false, found `{other}`",
                    path.display(),
                    e.line,
                    e.key
                ),
            }
        }
    }
    merged.extend(user_rest);
    Ok(merged)
}

/// Every argument of the chosen subcommand with its final raw value, in
/// declaration order.
pub fn resolved(cmd: &Command, matches: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let Some((name, sub)) = matches.subcommand() else {
        return out;
    };
    out.push(("command".to_string(), name.to_string()));
    let sub_cmd = cmd.find_subcommand(name).expect("matched subcommand exists");
    for arg in cmd.get_arguments().chain(sub_cmd.get_arguments()) {
        let id = arg.get_id().as_str();
        if id == "help" || id == "version" {
            continue;
        }
        let from = if sub.try_get_raw(id).ok().flatten().is_some() { sub } else { matches };
        let Ok(Some(values)) = from.try_get_raw(id) else {
            continue;
        };
        let joined: Vec<String> = values.map(|v| v.to_string_lossy().into_owned()).collect();
        let key = arg.get_long().unwrap_or(id);
        out.push((key.to_string(), joined.join(",")));
    }
    out
}
