//! Binary model blobs: magic, kind tag, JSON config block, then the
//! kind-specific payload. Integers and floats are little-endian.

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::mlp::{MlpModel, Network};
use super::svr::{Kernel, SvrModel};
use super::tree::{Node, Tree};
use super::{Boosting, FittedParams, LinearModel, RegressorConfig, RegressorKind, RegressorModel, Standardizer};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MODEL_MAGIC: &[u8; 5] = b"RGRM1";

const P_LINEAR: u8 = 0;
const P_TREE: u8 = 1;
const P_BOOSTING: u8 = 2;
const P_SVR: u8 = 3;
const P_MLP: u8 = 4;

// Writes into a Vec<u8> cannot fail.
struct Out(Vec<u8>);

impl Out {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.write_u32::<LittleEndian>(v as u32).unwrap();
    }
    fn f64(&mut self, v: f64) {
        self.0.write_f64::<LittleEndian>(v).unwrap();
    }
    fn f64s(&mut self, v: &[f64]) {
        self.u32(v.len());
        v.iter().for_each(|&x| self.f64(x));
    }
    fn scaler(&mut self, s: &Standardizer) {
        self.f64s(&s.mean);
        self.f64s(&s.std);
    }
    fn tree(&mut self, t: &Tree) {
        self.u32(t.nodes.len());
        for n in &t.nodes {
            match *n {
                Node::Leaf { value } => {
                    self.u8(0);
                    self.f64(value);
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    self.u8(1);
                    self.u32(feature);
                    self.f64(threshold);
                    self.u32(left);
                    self.u32(right);
                }
            }
        }
    }
}

pub(super) fn encode(model: &RegressorModel) -> Vec<u8> {
    let mut o = Out(MODEL_MAGIC.to_vec());
    o.u8(model.kind.tag());
    let config = serde_json::to_vec(&model.config).expect("config serializes");
    o.u32(config.len());
    o.0.extend_from_slice(&config);
    o.u32(model.n_features);
    o.f64(model.train_time_ms);
    o.u8(model.converged as u8);
    o.f64(model.target_shift);
    o.f64(model.target_scale);
    match &model.params {
        FittedParams::Linear(m) => {
            o.u8(P_LINEAR);
            o.f64s(&m.coef);
            o.f64(m.intercept);
        }
        FittedParams::Tree(t) => {
            o.u8(P_TREE);
            o.tree(t);
        }
        FittedParams::Boosting(b) => {
            o.u8(P_BOOSTING);
            o.f64(b.init);
            o.f64(b.learning_rate);
            o.u32(b.trees.len());
            b.trees.iter().for_each(|t| o.tree(t));
        }
        FittedParams::Svr(s) => {
            o.u8(P_SVR);
            o.scaler(&s.scaler);
            o.u8(s.kernel.tag());
            o.f64(s.gamma);
            o.u32(s.support.rows());
            o.u32(s.support.cols());
            s.support.as_slice().iter().for_each(|&v| o.f64(v));
            o.f64s(&s.coef);
            o.f64(s.rho);
        }
        FittedParams::Mlp(m) => {
            o.u8(P_MLP);
            o.scaler(&m.scaler);
            o.u32(m.net.inputs);
            o.u32(m.net.hidden);
            o.f64s(m.net.params());
        }
    }
    o.0
}

struct In<'a> {
    buf: &'a [u8],
    at: usize,
}

impl In<'_> {
    fn corrupt(&self, reason: impl Into<String>) -> Error {
        Error::CorruptFile {
            offset: self.at as u64,
            reason: reason.into(),
        }
    }
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.buf.len() - self.at < n {
            return Err(self.corrupt("unexpected end of model blob"));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        let mut s = self.take(4)?;
        Ok(s.read_u32::<LittleEndian>()? as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        let mut s = self.take(8)?;
        Ok(s.read_f64::<LittleEndian>()?)
    }
    /// Length-prefixed; the length is checked against the remaining bytes
    /// before allocating.
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.u32()?;
        self.f64_run(n)
    }
    fn f64_run(&mut self, n: usize) -> Result<Vec<f64>> {
        if n.checked_mul(8).is_none_or(|b| b > self.buf.len() - self.at) {
            return Err(self.corrupt("array longer than blob"));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn scaler(&mut self) -> Result<Standardizer> {
        let mean = self.f64s()?;
        let std = self.f64s()?;
        if mean.len() != std.len() {
            return Err(self.corrupt("scaler arrays differ in length"));
        }
        Ok(Standardizer { mean, std })
    }
    fn tree(&mut self, features: usize) -> Result<Tree> {
        let count = self.u32()?;
        if count == 0 || count > self.buf.len() - self.at {
            return Err(self.corrupt("bad tree size"));
        }
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            nodes.push(match self.u8()? {
                0 => Node::Leaf { value: self.f64()? },
                1 => {
                    let feature = self.u32()?;
                    let threshold = self.f64()?;
                    let (left, right) = (self.u32()?, self.u32()?);
                    let here = nodes.len();
                    if feature >= features || left <= here || right <= here || left >= count || right >= count {
                        return Err(self.corrupt("tree split out of range"));
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    }
                }
                t => return Err(self.corrupt(format!("unknown node tag {t}"))),
            });
        }
        Ok(Tree { nodes })
    }
}

pub(super) fn decode(bytes: &[u8]) -> Result<RegressorModel> {
    let mut r = In { buf: bytes, at: 0 };
    let magic = r.take(MODEL_MAGIC.len())?;
    if magic != MODEL_MAGIC {
        if magic.starts_with(b"RGRM") {
            return Err(Error::UnknownVersion(String::from_utf8_lossy(magic).into_owned()));
        }
        return Err(Error::CorruptFile {
            offset: 0,
            reason: "bad magic".into(),
        });
    }
    let tag = r.u8()?;
    let kind = RegressorKind::from_tag(tag).ok_or_else(|| r.corrupt(format!("unknown kind tag {tag}")))?;
    let len = r.u32()?;
    let config: RegressorConfig =
        serde_json::from_slice(r.take(len)?).map_err(|e| r.corrupt(format!("config block: {e}")))?;
    let n_features = r.u32()?;
    let train_time_ms = r.f64()?;
    let converged = r.u8()? != 0;
    let target_shift = r.f64()?;
    let target_scale = r.f64()?;
    let params = match r.u8()? {
        P_LINEAR => {
            let coef = r.f64s()?;
            if coef.len() != n_features {
                return Err(r.corrupt("coefficient count differs from feature count"));
            }
            FittedParams::Linear(LinearModel {
                coef,
                intercept: r.f64()?,
            })
        }
        P_TREE => FittedParams::Tree(r.tree(n_features)?),
        P_BOOSTING => {
            let init = r.f64()?;
            let learning_rate = r.f64()?;
            let count = r.u32()?;
            if count > r.buf.len() - r.at {
                return Err(r.corrupt("bad tree count"));
            }
            let trees = (0..count).map(|_| r.tree(n_features)).collect::<Result<_>>()?;
            FittedParams::Boosting(Boosting {
                init,
                learning_rate,
                trees,
            })
        }
        P_SVR => {
            let scaler = r.scaler()?;
            let kt = r.u8()?;
            let kernel = Kernel::from_tag(kt).ok_or_else(|| r.corrupt(format!("unknown kernel tag {kt}")))?;
            let gamma = r.f64()?;
            let (rows, cols) = (r.u32()?, r.u32()?);
            if cols != n_features || scaler.mean.len() != n_features {
                return Err(r.corrupt("support vector width differs from feature count"));
            }
            let data = r.f64_run(rows.checked_mul(cols).ok_or_else(|| r.corrupt("support size overflow"))?)?;
            let support = Matrix::from_vec(rows, cols, data)?;
            let coef = r.f64s()?;
            if coef.len() != rows {
                return Err(r.corrupt("coefficient count differs from support count"));
            }
            let rho = r.f64()?;
            FittedParams::Svr(SvrModel::from_parts(scaler, kernel, gamma, support, coef, rho))
        }
        P_MLP => {
            let scaler = r.scaler()?;
            let (inputs, hidden) = (r.u32()?, r.u32()?);
            if inputs != n_features || scaler.mean.len() != n_features {
                return Err(r.corrupt("network width differs from feature count"));
            }
            let theta = r.f64s()?;
            let net = Network::from_params(inputs, hidden, theta).map_err(|_| r.corrupt("network parameter count"))?;
            FittedParams::Mlp(MlpModel { scaler, net })
        }
        t => return Err(r.corrupt(format!("unknown payload tag {t}"))),
    };
    if r.at != bytes.len() {
        return Err(r.corrupt("trailing bytes"));
    }
    Ok(RegressorModel {
        kind,
        config,
        params,
        n_features,
        train_time_ms,
        converged,
        target_shift,
        target_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fit;
    use super::*;
    use crate::seed;
    use rand::Rng as _;

    fn problem() -> (Matrix, Vec<f64>) {
        let mut rng = seed::rng(12);
        let x = Matrix::from_vec(80, 3, (0..240).map(|_| rng.random_range(0.0..10.0)).collect()).unwrap();
        let y = x.iter_rows().map(|r| r[0] * r[1] - r[2] + rng.random_range(-1.0..1.0)).collect();
        (x, y)
    }

    #[test]
    fn every_kind_round_trips_bit_exactly() {
        let (x, y) = problem();
        let cfg = RegressorConfig {
            mlp_max_epochs: 20,
            ..Default::default()
        };
        for kind in RegressorKind::ALL {
            let model = fit(kind, &cfg, &x, &y, 5).unwrap();
            let bytes = model.to_bytes();
            let back = RegressorModel::from_bytes(&bytes).unwrap();
            assert_eq!(back, model, "{kind}");
            assert_eq!(back.to_bytes(), bytes);
            let (a, b) = (model.predict(&x).unwrap(), back.predict(&x).unwrap());
            assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()), "{kind}");
        }
    }

    #[test]
    fn truncation_and_versions_are_rejected() {
        let (x, y) = problem();
        let bytes = fit(RegressorKind::GradientBoosting, &RegressorConfig::default(), &x, &y, 0)
            .unwrap()
            .to_bytes();
        for cut in [0, 3, 5, 6, 40, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(
                RegressorModel::from_bytes(&bytes[..cut]),
                Err(Error::CorruptFile { .. })
            ));
        }
        let mut v2 = bytes.clone();
        v2[4] = b'2';
        assert!(matches!(RegressorModel::from_bytes(&v2), Err(Error::UnknownVersion(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(RegressorModel::from_bytes(&extra).is_err());
    }
}
