use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// State sequence indexed by consecutive instants from `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub start: usize,
    pub states: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(start: usize, states: Vec<Vec<f64>>) -> Self {
        Trace { start, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.states.first().map(Vec::len)
    }

    /// Writes `k,x0,...` CSV with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.dim().unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (i, x) in self.states.iter().enumerate() {
            let mut row = vec![(self.start + i).to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<trace output>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Trace> {
        let mut reader = TraceReader::new(input)?;
        let mut states = Vec::new();
        let mut start = None;
        for row in &mut reader {
            let (k, x) = row?;
            start.get_or_insert(k);
            states.push(x);
        }
        Ok(Trace {
            start: start.unwrap_or(0),
            states,
        })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Trace> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Trace::read_csv(std::io::BufReader::new(f))
    }
}

/// Incremental reader for `k,x0,...` CSV; yields rows as they arrive and
/// checks that instants are consecutive.
pub struct TraceReader<R: Read> {
    records: csv::StringRecordsIntoIter<R>,
    dim: usize,
    row: usize,
    next_k: Option<usize>,
}

impl<R: Read> TraceReader<R> {
    pub fn new(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("k") {
            return Err(Error::Trace {
                row: 1,
                message: "header must start with `k`".into(),
            });
        }
        for (i, h) in header.iter().skip(1).enumerate() {
            if h != format!("x{i}") {
                return Err(Error::Trace {
                    row: 1,
                    message: format!("expected column `x{i}`, found `{h}`"),
                });
            }
        }
        Ok(TraceReader {
            dim: header.len() - 1,
            records: r.into_records(),
            row: 1,
            next_k: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn parse(&mut self, rec: csv::StringRecord) -> Result<(usize, Vec<f64>)> {
        let row = self.row;
        let bad = |message: String| Error::Trace { row, message };
        if rec.len() != self.dim + 1 {
            return Err(bad(format!("expected {} fields, found {}", self.dim + 1, rec.len())));
        }
        let k: usize = rec[0]
            .parse()
            .map_err(|_| bad(format!("bad instant `{}`", &rec[0])))?;
        if let Some(want) = self.next_k {
            if k != want {
                return Err(bad(format!("expected instant {want}, found {k}")));
            }
        }
        let x = rec
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("bad value `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.next_k = Some(k + 1);
        Ok((k, x))
    }
}

impl<R: Read> Iterator for TraceReader<R> {
    type Item = Result<(usize, Vec<f64>)>;

    fn next(&mut self) -> Option<Self::Item> {
        let rec = self.records.next()?;
        self.row += 1;
        Some(match rec {
            Ok(rec) => self.parse(rec),
            Err(e) => Err(Error::Trace {
                row: self.row,
                message: e.to_string(),
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = Trace::new(0, vec![vec![15.0], vec![17.3], vec![19.278]]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().next(), Some("k,x0"));
        assert_eq!(Trace::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn gaps_and_garbage_are_rejected() {
        let gap = "k,x0\n0,1\n2,1\n";
        assert!(matches!(Trace::read_csv(gap.as_bytes()), Err(Error::Trace { row: 3, .. })));
        let bad = "k,x0\n0,abc\n";
        assert!(matches!(Trace::read_csv(bad.as_bytes()), Err(Error::Trace { row: 2, .. })));
        let short = "k,x0,x1\n0,1\n";
        assert!(Trace::read_csv(short.as_bytes()).is_err());
    }
}
