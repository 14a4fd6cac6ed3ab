//! On-disk formats: raw text, key files, and the bigram count cache.
//!
//! Key files hold one permutation per line as space-separated indices. A
//! substitution or transposition key is a single line; a combined key is the
//! substitution line followed by the transposition line.
//!
//! The model cache is a CSV with header `sym1,sym2,count` and one row per
//! ordered symbol pair, `sym1` major, in alphabet order.

use std::fs;
use std::io::Write;
use std::path::Path;

use cipherchain_core::{Alphabet, BigramModel, CombinedKey, Key, KeySpace, SubstitutionKey, TranspositionKey};

use crate::error::{CliError, Result};

pub const MODEL_CSV_HEADER: [&str; 3] = ["sym1", "sym2", "count"];

/// Reads a file as text, replacing invalid UTF-8.
pub fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Concatenates several files, separated by newlines.
pub fn read_corpus<P: AsRef<Path>>(paths: &[P]) -> Result<String> {
    let mut out = String::new();
    for p in paths {
        out.push_str(&read_text(p.as_ref())?);
        out.push('\n');
    }
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn perm_line(perm: &[usize]) -> String {
    perm.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn format_key(key: &Key) -> String {
    match key {
        Key::Substitution(k) => format!("{}\n", perm_line(&k.to_indices())),
        Key::Transposition(k) => format!("{}\n", perm_line(k.order())),
        Key::Combined(k) => format!(
            "{}\n{}\n",
            perm_line(&k.substitution.to_indices()),
            perm_line(k.transposition.order())
        ),
    }
}

fn parse_perm(path: &Path, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| CliError::format(path, format!("bad index {t:?} in key")))
        })
        .collect()
}

/// Parses a key file for the given key space.
pub fn parse_key(path: &Path, contents: &str, space: KeySpace, alphabet_len: usize) -> Result<Key> {
    let lines: Vec<&str> = contents.lines().filter(|l| !l.trim().is_empty()).collect();
    let expected = if matches!(space, KeySpace::Combined { .. }) { 2 } else { 1 };
    if lines.len() != expected {
        return Err(CliError::format(
            path,
            format!("expected {expected} key line(s), found {}", lines.len()),
        ));
    }
    let check_len = |perm: &[usize], want: usize, what: &str| -> Result<()> {
        if perm.len() != want {
            return Err(CliError::format(
                path,
                format!("{what} key has {} entries, expected {want}", perm.len()),
            ));
        }
        Ok(())
    };
    let key = match space {
        KeySpace::Substitution => {
            let perm = parse_perm(path, lines[0])?;
            check_len(&perm, alphabet_len, "substitution")?;
            Key::Substitution(SubstitutionKey::new(perm)?)
        }
        KeySpace::Transposition { period } => {
            let order = parse_perm(path, lines[0])?;
            check_len(&order, period, "transposition")?;
            Key::Transposition(TranspositionKey::new(order)?)
        }
        KeySpace::Combined { period } => {
            let perm = parse_perm(path, lines[0])?;
            check_len(&perm, alphabet_len, "substitution")?;
            let order = parse_perm(path, lines[1])?;
            check_len(&order, period, "transposition")?;
            Key::Combined(CombinedKey {
                substitution: SubstitutionKey::new(perm)?,
                transposition: TranspositionKey::new(order)?,
            })
        }
    };
    Ok(key)
}

pub fn read_key(path: &Path, space: KeySpace, alphabet_len: usize) -> Result<Key> {
    parse_key(path, &read_text(path)?, space, alphabet_len)
}

pub fn model_to_csv(model: &BigramModel, alphabet: &Alphabet) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MODEL_CSV_HEADER)?;
    let n = alphabet.len();
    for a in 0..n {
        for b in 0..n {
            w.write_record([
                alphabet.symbols()[a].to_string(),
                alphabet.symbols()[b].to_string(),
                model.count(a, b).to_string(),
            ])?;
        }
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv buffer: {e}")))
}

/// Loads a count cache. The stored corpus length is not part of the format,
/// so it is taken as the number of pairs plus one.
pub fn model_from_csv(path: &Path, contents: &[u8], alphabet: &Alphabet, delta: f64) -> Result<BigramModel> {
    let n = alphabet.len();
    let mut counts = vec![0u64; n * n];
    let mut seen = vec![false; n * n];
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::None)
        .from_reader(contents);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != MODEL_CSV_HEADER {
        return Err(CliError::format(path, "model header must be sym1,sym2,count"));
    }
    let symbol = |field: &str| -> Result<usize> {
        let mut chars = field.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => alphabet
                .index_of(c)
                .map(usize::from)
                .ok_or_else(|| CliError::format(path, format!("symbol {c:?} is not in the alphabet"))),
            _ => Err(CliError::format(path, format!("bad symbol field {field:?}"))),
        }
    };
    for record in r.records() {
        let record = record?;
        if record.len() != 3 {
            return Err(CliError::format(path, "model rows need three fields"));
        }
        let (a, b) = (symbol(&record[0])?, symbol(&record[1])?);
        let count = record[2]
            .parse::<u64>()
            .map_err(|_| CliError::format(path, format!("bad count {:?}", &record[2])))?;
        if std::mem::replace(&mut seen[a * n + b], true) {
            return Err(CliError::format(path, format!("duplicate row for pair {a},{b}")));
        }
        counts[a * n + b] = count;
    }
    if seen.iter().any(|s| !s) {
        return Err(CliError::format(path, format!("model must list all {} pairs", n * n)));
    }
    let total: u64 = counts.iter().sum();
    Ok(BigramModel::from_counts(n, counts, delta, total as usize + 1)?)
}

pub fn read_model(path: &Path, alphabet: &Alphabet, delta: f64) -> Result<BigramModel> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    model_from_csv(path, &bytes, alphabet, delta)
}
