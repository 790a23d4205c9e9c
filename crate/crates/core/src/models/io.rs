//! Plain-text model files.
//!
//! ```text
//! qmdn-model 1
//! kind qmdn
//! benchmark logistic
//! x_min 2.5000000000000000e0
//! x_max 3.9900000000000002e0
//! sigma_scale 6.4212121212121215e-2
//! n_qubits 3
//! n_layers 4
//! entangler 0-1 1-2 2-0
//! params 108
//! -1.2345678901234567e-2
//! ...
//! ```
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly. The circuit lines only appear for `kind qmdn`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{ClassicalMdn, MixtureModel, Model, ModelKind, Normalization, QMdn};
use crate::error::{Error, Result};
use crate::qsim::CircuitSpec;

const MAGIC: &str = "qmdn-model";
const VERSION: u32 = 1;

/// A model together with the benchmark it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub benchmark: String,
    pub model: Model,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_model<W: Write>(mut w: W, file: &ModelFile) -> std::io::Result<()> {
    let model = &file.model;
    let norm = model.normalization();
    writeln!(w, "{MAGIC} {VERSION}")?;
    writeln!(w, "kind {}", model.kind())?;
    writeln!(w, "benchmark {}", file.benchmark)?;
    writeln!(w, "x_min {}", fmt_f64(norm.x_min))?;
    writeln!(w, "x_max {}", fmt_f64(norm.x_max))?;
    writeln!(w, "sigma_scale {}", fmt_f64(norm.sigma_scale))?;
    if let Model::Quantum(q) = model {
        let spec = q.spec();
        writeln!(w, "n_qubits {}", spec.n_qubits())?;
        writeln!(w, "n_layers {}", spec.n_layers())?;
        let pairs: Vec<String> = spec
            .entangler()
            .iter()
            .map(|(c, t)| format!("{c}-{t}"))
            .collect();
        writeln!(w, "entangler {}", pairs.join(" "))?;
    }
    writeln!(w, "params {}", model.param_count())?;
    for p in model.params() {
        writeln!(w, "{}", fmt_f64(*p))?;
    }
    Ok(())
}

pub fn write_model_file(path: impl AsRef<Path>, file: &ModelFile) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_model(&mut buf, file).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::io::Lines<BufReader<Box<dyn Read + 'a>>>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<String> {
        match self.inner.next() {
            Some((i, Ok(s))) => {
                self.line = i + 1;
                Ok(s)
            }
            Some((_, Err(e))) => Err(Error::io(self.path, e)),
            None => Err(Error::parse(self.path, self.line + 1, "unexpected end of file")),
        }
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::parse(self.path, self.line, reason)
    }

    fn field(&mut self, key: &str) -> Result<String> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim().to_string()),
            _ => Err(self.err(format!("expected `{key} <value>`, found `{line}`"))),
        }
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse().map_err(|_| self.err(format!("bad value `{v}` for {key}")))
    }
}

/// Reads a model file. `path` is only used in error messages.
pub fn read_model<R: Read>(reader: R, path: &Path) -> Result<ModelFile> {
    let boxed: Box<dyn Read> = Box::new(reader);
    let mut lines = Lines {
        path,
        inner: BufReader::new(boxed).lines().enumerate(),
        line: 0,
    };
    let header = lines.next_line()?;
    if header != format!("{MAGIC} {VERSION}") {
        return Err(lines.err(format!("unsupported header `{header}`")));
    }
    let kind: ModelKind = lines.field("kind")?.parse()?;
    let benchmark = lines.field("benchmark")?;
    let norm = Normalization {
        x_min: lines.number("x_min")?,
        x_max: lines.number("x_max")?,
        sigma_scale: lines.number("sigma_scale")?,
    };
    let spec = match kind {
        ModelKind::Mdn => None,
        ModelKind::Qmdn => {
            let n_qubits: usize = lines.number("n_qubits")?;
            let n_layers: usize = lines.number("n_layers")?;
            let raw = lines.field("entangler")?;
            let mut pairs = Vec::new();
            for tok in raw.split_whitespace() {
                let parsed = tok
                    .split_once('-')
                    .and_then(|(c, t)| Some((c.parse().ok()?, t.parse().ok()?)));
                pairs.push(parsed.ok_or_else(|| lines.err(format!("bad CNOT pair `{tok}`")))?);
            }
            Some(CircuitSpec::new(n_qubits, n_layers, pairs)?)
        }
    };
    let count: usize = lines.number("params")?;
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines.next_line()?;
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| lines.err(format!("bad parameter `{line}`")))?;
        if !v.is_finite() {
            return Err(lines.err("non-finite parameter"));
        }
        params.push(v);
    }
    let model = match spec {
        None => Model::Classical(ClassicalMdn::from_params(params, norm)?),
        Some(spec) => Model::Quantum(QMdn::new(spec, params, norm)?),
    };
    Ok(ModelFile { benchmark, model })
}

pub fn read_model_file(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(f, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(file: &ModelFile) -> ModelFile {
        let mut buf = Vec::new();
        write_model(&mut buf, file).unwrap();
        read_model(buf.as_slice(), Path::new("mem")).unwrap()
    }

    #[test]
    fn both_kinds_roundtrip_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in ModelKind::ALL {
            let mut model = Model::init(kind, &mut rng);
            model.set_normalization(Normalization {
                x_min: 2.5,
                x_max: 3.99,
                sigma_scale: 0.1 / 3.0,
            });
            let file = ModelFile {
                benchmark: "logistic".into(),
                model,
            };
            let back = roundtrip(&file);
            assert_eq!(back, file);
            for (a, b) in back.model.params().iter().zip(file.model.params()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        let err = read_model("not a model\n".as_bytes(), Path::new("m")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let truncated = "qmdn-model 1\nkind mdn\nbenchmark x\nx_min 0\nx_max 1\nsigma_scale 1\nparams 100\n0.5\n";
        assert!(read_model(truncated.as_bytes(), Path::new("m")).is_err());
    }
}
