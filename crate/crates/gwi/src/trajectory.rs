use std::io::{Read, Write};

use gwi_core::CountVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("trajectory CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("trajectory CSV: header must be \"n,x1,...,xp\", found \"{0}\"")]
    Header(String),
    #[error("trajectory CSV line {line}: {message}")]
    Row { line: u64, message: String },
}

/// Column names `n,x1,…,xp`, or with a prefix such as `y` for `n,y1,…`.
pub fn header(p: usize, prefixes: &[&str]) -> Vec<String> {
    let mut h = vec!["n".to_string()];
    for prefix in prefixes {
        h.extend((1..=p).map(|i| format!("{prefix}{i}")));
    }
    h
}

pub fn write_states<W: Write>(out: W, states: &[CountVector]) -> Result<(), TrajectoryError> {
    write_columns(out, &["x"], &[states])
}

/// One row per step: `n`, then each series' entries in turn.
pub fn write_columns<W: Write>(out: W, prefixes: &[&str], series: &[&[CountVector]]) -> Result<(), TrajectoryError> {
    let p = series.first().and_then(|s| s.first()).map_or(0, |x| x.dim());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(p, prefixes))?;
    let len = series.iter().map(|s| s.len()).min().unwrap_or(0);
    for n in 0..len {
        let mut row = vec![n.to_string()];
        for s in series {
            row.extend(s[n].entries().iter().map(u64::to_string));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads `n,x1,…,xp` rows; `n` must count up from 0.
pub fn read_states<R: Read>(input: R) -> Result<Vec<CountVector>, TrajectoryError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let head = r.headers()?.clone();
    let p = head.len().saturating_sub(1);
    let expected = header(p, &["x"]);
    if p == 0 || head.iter().ne(expected.iter().map(String::as_str)) {
        return Err(TrajectoryError::Header(head.iter().collect::<Vec<_>>().join(",")));
    }
    let mut states = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |pos| pos.line());
        let bad = |message: String| TrajectoryError::Row { line, message };
        let values: Vec<u64> = rec
            .iter()
            .map(|f| f.parse::<u64>().map_err(|_| bad(format!("\"{f}\" is not a non-negative integer"))))
            .collect::<Result<_, _>>()?;
        if values[0] != k as u64 {
            return Err(bad(format!("expected n = {k}, found {}", values[0])));
        }
        states.push(CountVector::new(values[1..].to_vec()));
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let states = vec![CountVector::new(vec![0, 0]), CountVector::new(vec![3, 1])];
        let mut buf = Vec::new();
        write_states(&mut buf, &states).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "n,x1,x2\n0,0,0\n1,3,1\n");
        assert_eq!(read_states(buf.as_slice()).unwrap(), states);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_states("t,x1\n0,1\n".as_bytes()), Err(TrajectoryError::Header(_))));
        assert!(matches!(read_states("n,x1\n0,1\n2,1\n".as_bytes()), Err(TrajectoryError::Row { line: 3, .. })));
        assert!(matches!(read_states("n,x1\n0,-1\n".as_bytes()), Err(TrajectoryError::Row { .. })));
        assert!(read_states("n,x1\n0,1,2\n".as_bytes()).is_err());
    }
}
