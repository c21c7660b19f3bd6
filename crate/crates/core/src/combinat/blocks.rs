use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::decomp::Decomposition;
use crate::{Error, Result};

/// Exact exponent arithmetic.
pub type Q = Rational64;

/// Where factor `i` lands after the term expansion: `I_1` splits into good,
/// bad-OPE-OPE and bad-CZ-OPE; `I_2` into good, bad-Y and bad-X; the
/// unexpanded factors and spectators `I_34 = I_3 ∪ I_4` into good and bad.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorClass {
    Good1,
    BadOpeOpe1,
    BadCzOpe1,
    Good2,
    BadY2,
    BadX2,
    Good34,
    Bad34,
}

impl FactorClass {
    pub fn is_good(self) -> bool {
        matches!(self, FactorClass::Good1 | FactorClass::Good2 | FactorClass::Good34)
    }

    pub fn in_i1(self) -> bool {
        matches!(self, FactorClass::Good1 | FactorClass::BadOpeOpe1 | FactorClass::BadCzOpe1)
    }

    pub fn in_i2(self) -> bool {
        matches!(self, FactorClass::Good2 | FactorClass::BadY2 | FactorClass::BadX2)
    }

    pub fn in_i34(self) -> bool {
        matches!(self, FactorClass::Good34 | FactorClass::Bad34)
    }

    /// Whether the factor contributes a `Y` vertex paired with its `X` vertex.
    pub fn has_partner(self) -> bool {
        matches!(self, FactorClass::BadOpeOpe1 | FactorClass::BadY2)
    }
}

/// Dimensions of a renormalized factor `A × B → C*`, plus the OPE channel `C_i`
/// when the factor is in `I_1BCO`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorDims {
    /// `Δ_i = [C*_i]`.
    pub delta: Q,
    pub a: Q,
    pub b: Q,
    #[serde(default)]
    pub channel: Option<Q>,
}

impl FactorDims {
    pub fn new(a: Q, b: Q, delta: Q) -> Self {
        FactorDims {
            delta,
            a,
            b,
            channel: None,
        }
    }

    pub fn with_channel(mut self, c: Q) -> Self {
        self.channel = Some(c);
        self
    }
}

/// One expansion term: `m` renormalized factors followed by `n - m`
/// spectators, each with its class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermShape {
    pub m: usize,
    pub n: usize,
    pub classes: Vec<FactorClass>,
    pub factors: Vec<FactorDims>,
    /// `[A_i]` of the spectators `i = m, ..., n-1`.
    pub spectators: Vec<Q>,
}

impl TermShape {
    pub fn new(classes: Vec<FactorClass>, factors: Vec<FactorDims>, spectators: Vec<Q>) -> Result<Self> {
        let shape = TermShape {
            m: factors.len(),
            n: factors.len() + spectators.len(),
            classes,
            factors,
            spectators,
        };
        shape.validate()?;
        Ok(shape)
    }

    /// Assemble from the nested decompositions: `(I_1, I_2, I_3)` of `[m]`,
    /// `(I_1G, I_1BOO, I_1BCO)` of `I_1`, `(I_2G, I_2BY, I_2BX)` of `I_2` and
    /// the bad subset of `I_34`.
    pub fn from_decompositions(
        triple: &Decomposition,
        split1: &Decomposition,
        split2: &Decomposition,
        bad34: &[usize],
        factors: Vec<FactorDims>,
        spectators: Vec<Q>,
    ) -> Result<Self> {
        let m = factors.len();
        let n = m + spectators.len();
        let bad = |msg: &str| Error::Format(format!("inconsistent decompositions: {msg}"));
        if triple.parts.len() != 3 || split1.parts.len() != 3 || split2.parts.len() != 3 {
            return Err(bad("expected three parts each"));
        }
        if triple.ground() != (0..m).collect::<Vec<_>>() {
            return Err(bad("(I1, I2, I3) must cover [m]"));
        }
        let mut i1 = triple.parts[0].clone();
        i1.sort_unstable();
        let mut i2 = triple.parts[1].clone();
        i2.sort_unstable();
        if split1.ground() != i1 {
            return Err(bad("the I1 split must cover I1"));
        }
        if split2.ground() != i2 {
            return Err(bad("the I2 split must cover I2"));
        }
        let mut classes = Vec::with_capacity(n);
        for i in 0..n {
            let bad34_i = bad34.contains(&i);
            let class = if i >= m {
                if bad34_i {
                    FactorClass::Bad34
                } else {
                    FactorClass::Good34
                }
            } else {
                match triple.part_of(i) {
                    Some(0) => {
                        if bad34_i {
                            return Err(bad("bad34 contains an element of I1"));
                        }
                        [FactorClass::Good1, FactorClass::BadOpeOpe1, FactorClass::BadCzOpe1][split1.part_of(i).unwrap()]
                    }
                    Some(1) => {
                        if bad34_i {
                            return Err(bad("bad34 contains an element of I2"));
                        }
                        [FactorClass::Good2, FactorClass::BadY2, FactorClass::BadX2][split2.part_of(i).unwrap()]
                    }
                    _ => {
                        if bad34_i {
                            FactorClass::Bad34
                        } else {
                            FactorClass::Good34
                        }
                    }
                }
            };
            classes.push(class);
        }
        if bad34.iter().any(|&i| i >= n) {
            return Err(bad("bad34 index out of range"));
        }
        TermShape::new(classes, factors, spectators)
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.len() != self.n || self.factors.len() != self.m || self.spectators.len() != self.n - self.m {
            return Err(Error::Format("term shape lengths disagree".into()));
        }
        for (i, c) in self.classes.iter().enumerate() {
            if i >= self.m && !c.in_i34() {
                return Err(Error::Format(format!("spectator {i} cannot be in class {c:?}")));
            }
            if *c == FactorClass::BadCzOpe1 && self.factors[i].channel.is_none() {
                return Err(Error::Format(format!("factor {i} in I_1BCO needs a channel dimension")));
            }
        }
        Ok(())
    }

    pub fn count(&self, pred: impl Fn(FactorClass) -> bool) -> usize {
        self.classes.iter().filter(|&&c| pred(c)).count()
    }

    pub fn count_class(&self, class: FactorClass) -> usize {
        self.count(|c| c == class)
    }

    /// `|I_1| + |I_2|`.
    pub fn expanded(&self) -> usize {
        self.count(|c| c.in_i1() || c.in_i2())
    }

    /// `|I_B|`.
    pub fn bad(&self) -> usize {
        self.count(|c| !c.is_good())
    }

    /// `[D_i]`: `Δ_i` for an unexpanded factor, `[A_i]` for a spectator.
    pub fn d_dim(&self, i: usize) -> Q {
        if i < self.m {
            self.factors[i].delta
        } else {
            self.spectators[i - self.m]
        }
    }
}

/// The ten vertex blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    OneGX,
    TwoGX,
    OneBooY,
    OneBooX,
    OneBcoX,
    TwoByY,
    TwoByX,
    TwoBxX,
    ThreeFourGX,
    ThreeFourBX,
}

impl Block {
    pub fn is_good(self) -> bool {
        matches!(self, Block::OneGX | Block::TwoGX | Block::ThreeFourGX)
    }

    pub fn side(self) -> Side {
        match self {
            Block::OneBooY | Block::TwoByY => Side::Y,
            _ => Side::X,
        }
    }

    pub fn effective(self) -> bool {
        self != Block::TwoByX
    }

    pub fn tag(self) -> &'static str {
        match self {
            Block::OneGX => "V1G_X",
            Block::TwoGX => "V2G_X",
            Block::OneBooY => "V1BOO_Y",
            Block::OneBooX => "V1BOO_X",
            Block::OneBcoX => "V1BCO_X",
            Block::TwoByY => "V2BY_Y",
            Block::TwoByX => "V2BY_X",
            Block::TwoBxX => "V2BX_X",
            Block::ThreeFourGX => "V34G_X",
            Block::ThreeFourBX => "V34B_X",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    /// Factor index `i`.
    pub factor: usize,
    pub side: Side,
    pub block: Block,
    pub effective: bool,
    /// Denominator exponent `β_a`.
    pub beta: Q,
}

/// Vertex set `V ⊆ [n] × {X, Y}` of one term with its blocks, exponents and
/// the involution `ι` swapping the `X` and `Y` vertices of `I_1BOO ∪ I_2BY`.
///
/// Vertices are ordered by factor, `X` before `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTable {
    pub shape: TermShape,
    pub gamma: Q,
    pub eps: Q,
    pub vertices: Vec<Vertex>,
    pub iota: Vec<usize>,
}

impl BlockTable {
    pub fn build(shape: &TermShape, gamma: Q, eps: Q) -> Result<Self> {
        shape.validate()?;
        let mut vertices = Vec::new();
        let mut iota = Vec::new();
        let zero = Q::from_integer(0);
        for (i, &class) in shape.classes.iter().enumerate() {
            let x = |block: Block, beta: Q| Vertex {
                factor: i,
                side: block.side(),
                block,
                effective: block.effective(),
                beta,
            };
            let dims = shape.factors.get(i);
            let delta = dims.map(|f| f.delta).unwrap_or(zero);
            let pair: Vec<Vertex> = match class {
                FactorClass::Good1 => vec![x(Block::OneGX, delta + gamma + eps)],
                FactorClass::Good2 => vec![x(Block::TwoGX, delta + gamma + eps)],
                FactorClass::BadOpeOpe1 => {
                    let f = dims.unwrap();
                    vec![x(Block::OneBooX, f.b + eps), x(Block::OneBooY, f.a + eps)]
                }
                FactorClass::BadCzOpe1 => vec![x(Block::OneBcoX, dims.unwrap().channel.unwrap() + eps)],
                FactorClass::BadY2 => vec![x(Block::TwoByX, zero), x(Block::TwoByY, delta + eps)],
                FactorClass::BadX2 => vec![x(Block::TwoBxX, delta + eps)],
                FactorClass::Good34 => vec![x(Block::ThreeFourGX, shape.d_dim(i) + eps)],
                FactorClass::Bad34 => vec![x(Block::ThreeFourBX, shape.d_dim(i) + eps)],
            };
            let base = vertices.len();
            if pair.len() == 2 {
                iota.push(base + 1);
                iota.push(base);
            } else {
                iota.push(base);
            }
            vertices.extend(pair);
        }
        Ok(BlockTable {
            shape: shape.clone(),
            gamma,
            eps,
            vertices,
            iota,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_good(&self, a: usize) -> bool {
        self.vertices[a].block.is_good()
    }

    pub fn is_x(&self, a: usize) -> bool {
        self.vertices[a].side == Side::X
    }

    fn select(&self, pred: impl Fn(&Vertex) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&a| pred(&self.vertices[a])).collect()
    }

    pub fn v_x(&self) -> Vec<usize> {
        self.select(|v| v.side == Side::X)
    }

    pub fn v_y(&self) -> Vec<usize> {
        self.select(|v| v.side == Side::Y)
    }

    pub fn v_good(&self) -> Vec<usize> {
        self.select(|v| v.block.is_good())
    }

    pub fn v_bad(&self) -> Vec<usize> {
        self.select(|v| !v.block.is_good())
    }

    pub fn v_bad_x(&self) -> Vec<usize> {
        self.select(|v| !v.block.is_good() && v.side == Side::X)
    }

    pub fn v_bad_y(&self) -> Vec<usize> {
        self.select(|v| !v.block.is_good() && v.side == Side::Y)
    }

    pub fn block(&self, b: Block) -> Vec<usize> {
        self.select(|v| v.block == b)
    }

    /// Short vertex name such as `3X` (1-based factor index).
    pub fn name(&self, a: usize) -> String {
        let v = &self.vertices[a];
        format!("{}{:?}", v.factor + 1, v.side)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn table_rows() {
        let f = FactorDims::new(q(1, 5), q(1, 5), q(2, 5));
        let shape = TermShape::new(
            vec![FactorClass::BadY2, FactorClass::BadOpeOpe1, FactorClass::Bad34],
            vec![f, f],
            vec![q(1, 5)],
        )
        .unwrap();
        let eps = q(1, 100);
        let t = BlockTable::build(&shape, q(3, 10), eps).unwrap();
        assert_eq!(t.len(), 3 + 2);
        assert_eq!(t.vertices[0].block, Block::TwoByX);
        assert!(!t.vertices[0].effective);
        assert_eq!(t.vertices[0].beta, q(0, 1));
        assert_eq!(t.vertices[1].beta, q(2, 5) + eps);
        assert_eq!(t.vertices[2].beta, q(1, 5) + eps);
        assert_eq!(t.vertices[3].block, Block::OneBooY);
        assert_eq!(t.iota, vec![1, 0, 3, 2, 4]);
        assert_eq!(t.v_bad_x().len(), 3);
    }
}
