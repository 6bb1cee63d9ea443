//! Finite groups as Cayley tables, and real signals on them.
//!
//! Element 0 is always the identity. Cyclic elements are residues,
//! commutative elements are coordinate vectors enumerated with the last
//! coordinate fastest, and the dihedral element `a^l x^m` has index
//! `l + n*m`. Octahedral elements are signed permutation matrices in the
//! order a breadth-first closure over the generators discovers them.

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKind {
    Cyclic(usize),
    Commutative(Vec<usize>),
    Dihedral(usize),
    Octahedral,
    FullOctahedral,
}

impl GroupKind {
    pub fn order(&self) -> usize {
        match self {
            GroupKind::Cyclic(n) => *n,
            GroupKind::Commutative(ns) => ns.iter().product(),
            GroupKind::Dihedral(n) => 2 * n,
            GroupKind::Octahedral => 24,
            GroupKind::FullOctahedral => 48,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupKind::Cyclic(0) => invalid("cyclic order must be at least 1"),
            GroupKind::Dihedral(0) => invalid("dihedral parameter must be at least 1"),
            GroupKind::Commutative(ns) if ns.is_empty() => invalid("commutative group needs at least one factor"),
            GroupKind::Commutative(ns) if ns.contains(&0) => invalid("commutative factors must be at least 1"),
            _ => Ok(()),
        }
    }

    /// True for the groups whose irreps are all one-dimensional.
    pub fn is_abelian(&self) -> bool {
        match self {
            GroupKind::Cyclic(_) | GroupKind::Commutative(_) => true,
            GroupKind::Dihedral(n) => *n <= 2,
            _ => false,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            GroupKind::Cyclic(_) => "cyclic",
            GroupKind::Commutative(_) => "commutative",
            GroupKind::Dihedral(_) => "dihedral",
            GroupKind::Octahedral => "octahedral",
            GroupKind::FullOctahedral => "full_octahedral",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupKind::Commutative(ns) => {
                let parts: Vec<String> = ns.iter().map(|n| n.to_string()).collect();
                write!(f, "commutative:{}", parts.join(","))
            }
            GroupKind::Dihedral(n) => write!(f, "dihedral:{n}"),
            GroupKind::Octahedral => write!(f, "octahedral"),
            GroupKind::FullOctahedral => write!(f, "full_octahedral"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        let num = |p: &str| -> Result<usize> {
            p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad group parameter '{p}' in '{s}'")))
        };
        let kind = match (name, params) {
            ("cyclic", Some(p)) => GroupKind::Cyclic(num(p)?),
            ("dihedral", Some(p)) => GroupKind::Dihedral(num(p)?),
            ("commutative", Some(p)) => GroupKind::Commutative(p.split(',').map(num).collect::<Result<Vec<_>>>()?),
            ("octahedral", None) => GroupKind::Octahedral,
            ("full_octahedral", None) => GroupKind::FullOctahedral,
            _ => return Err(Error::Parse(format!("unknown group '{s}'"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// 3x3 integer matrix, row major.
pub type IntMat3 = [[i8; 3]; 3];

pub(crate) fn mat3_mul(a: &IntMat3, b: &IntMat3) -> IntMat3 {
    let mut out = [[0i8; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) const ID3: IntMat3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
/// Quarter turn about z.
pub(crate) const QUARTER_Z: IntMat3 = [[0, -1, 0], [1, 0, 0], [0, 0, 1]];
/// Third turn about the (1,1,1) diagonal.
pub(crate) const THIRD_DIAG: IntMat3 = [[0, 0, 1], [1, 0, 0], [0, 1, 0]];
pub(crate) const NEG_ID3: IntMat3 = [[-1, 0, 0], [0, -1, 0], [0, 0, -1]];

/// Breadth-first closure of matrix generators. Returns the elements and, for
/// every non-identity element, the (parent, generator) pair it came from.
fn bfs_closure(gens: &[IntMat3]) -> (Vec<IntMat3>, Vec<Option<(usize, usize)>>) {
    let mut elems = vec![ID3];
    let mut words = vec![None];
    let mut head = 0;
    while head < elems.len() {
        let e = elems[head];
        for (gi, g) in gens.iter().enumerate() {
            let p = mat3_mul(&e, g);
            if !elems.contains(&p) {
                elems.push(p);
                words.push(Some((head, gi)));
            }
        }
        head += 1;
    }
    (elems, words)
}

fn mat3_label(m: &IntMat3) -> String {
    let axes = ['x', 'y', 'z'];
    let parts: Vec<String> = m
        .iter()
        .map(|row| {
            let (j, v) = row.iter().enumerate().find(|(_, v)| **v != 0).expect("signed permutation");
            if *v > 0 {
                axes[j].to_string()
            } else {
                format!("-{}", axes[j])
            }
        })
        .collect();
    format!("({})", parts.join(","))
}

#[derive(Clone, Debug)]
pub struct FiniteGroup {
    kind: GroupKind,
    n: usize,
    table: Vec<u32>,
    inverse: Vec<usize>,
    labels: Vec<String>,
    matrices: Option<Vec<IntMat3>>,
    words: Vec<Option<(usize, usize)>>,
    generators: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(kind: &GroupKind) -> Result<Self> {
        kind.validate()?;
        match kind {
            GroupKind::Cyclic(n) => Ok(Self::cyclic(*n)),
            GroupKind::Commutative(ns) => Ok(Self::commutative(ns)),
            GroupKind::Dihedral(n) => Ok(Self::dihedral(*n)),
            GroupKind::Octahedral => Ok(Self::from_matrices(GroupKind::Octahedral, &[QUARTER_Z, THIRD_DIAG])),
            GroupKind::FullOctahedral => Ok(Self::from_matrices(GroupKind::FullOctahedral, &[QUARTER_Z, THIRD_DIAG, NEG_ID3])),
        }
    }

    fn from_table(kind: GroupKind, n: usize, mul: impl Fn(usize, usize) -> usize, labels: Vec<String>) -> Self {
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = mul(a, b) as u32;
            }
        }
        let inverse = (0..n).map(|a| (0..n).find(|&b| table[a * n + b] == 0).expect("every element has an inverse")).collect();
        FiniteGroup { kind, n, table, inverse, labels, matrices: None, words: Vec::new(), generators: Vec::new() }
    }

    fn cyclic(n: usize) -> Self {
        let mut g = Self::from_table(GroupKind::Cyclic(n), n, |a, b| (a + b) % n, (0..n).map(|k| k.to_string()).collect());
        g.generators = if n > 1 { vec![1] } else { Vec::new() };
        g
    }

    fn commutative(ns: &[usize]) -> Self {
        let n: usize = ns.iter().product();
        let labels = (0..n)
            .map(|g| {
                let c: Vec<String> = unflatten(g, ns).iter().map(|x| x.to_string()).collect();
                format!("({})", c.join(","))
            })
            .collect();
        let owned = ns.to_vec();
        let mut g = Self::from_table(
            GroupKind::Commutative(ns.to_vec()),
            n,
            move |a, b| {
                let (ca, cb) = (unflatten(a, &owned), unflatten(b, &owned));
                let s: Vec<usize> = ca.iter().zip(&cb).zip(&owned).map(|((x, y), m)| (x + y) % m).collect();
                flatten(&s, &owned)
            },
            labels,
        );
        g.generators = (0..ns.len())
            .filter(|&l| ns[l] > 1)
            .map(|l| {
                let mut e = vec![0; ns.len()];
                e[l] = 1;
                flatten(&e, ns)
            })
            .collect();
        g
    }

    fn dihedral(n: usize) -> Self {
        let labels = (0..2 * n)
            .map(|g| {
                let (l, m) = (g % n, g / n);
                let a = match l {
                    0 => String::new(),
                    1 => "a".to_string(),
                    _ => format!("a^{l}"),
                };
                match (a.is_empty(), m) {
                    (true, 0) => "e".to_string(),
                    (false, 0) => a,
                    (_, _) => format!("{a}x"),
                }
            })
            .collect();
        let mut g = Self::from_table(
            GroupKind::Dihedral(n),
            2 * n,
            move |g, h| {
                let (l1, m1) = (g % n, g / n);
                let (l2, m2) = (h % n, h / n);
                let l = if m1 == 0 { (l1 + l2) % n } else { (l1 + n - l2) % n };
                l + n * ((m1 + m2) % 2)
            },
            labels,
        );
        g.generators = if n > 1 { vec![1, n] } else { vec![n] };
        g
    }

    fn from_matrices(kind: GroupKind, gens: &[IntMat3]) -> Self {
        let (elems, words) = bfs_closure(gens);
        let n = elems.len();
        let labels = elems.iter().map(mat3_label).collect();
        let lookup = elems.clone();
        let mut g = Self::from_table(
            kind,
            n,
            move |a, b| {
                let p = mat3_mul(&lookup[a], &lookup[b]);
                lookup.iter().position(|m| *m == p).expect("closed under multiplication")
            },
            labels,
        );
        g.generators = gens.iter().map(|m| elems.iter().position(|e| e == m).expect("generator is an element")).collect();
        g.matrices = Some(elems);
        g.words = words;
        g
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Elements reachable from the generators.
    pub fn closure_of_generators(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut out = vec![0];
        let mut head = 0;
        while head < out.len() {
            let e = out[head];
            for &s in &self.generators {
                let p = self.mul(e, s);
                if !seen[p] {
                    seen[p] = true;
                    out.push(p);
                }
            }
            head += 1;
        }
        out
    }

    /// Signed permutation matrix of an octahedral element.
    pub fn matrix(&self, g: usize) -> Option<&IntMat3> {
        self.matrices.as_ref().map(|m| &m[g])
    }

    /// How a matrix-group element was discovered: `g = parent * generator`.
    pub(crate) fn word(&self, g: usize) -> Option<(usize, usize)> {
        self.words.get(g).copied().flatten()
    }

    /// Coordinates of a commutative element.
    pub fn coords(&self, g: usize) -> Option<Vec<usize>> {
        match &self.kind {
            GroupKind::Commutative(ns) => Some(unflatten(g, ns)),
            GroupKind::Cyclic(_) => Some(vec![g]),
            _ => None,
        }
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Brute-force associativity check, cubic in the order.
    pub fn is_associative(&self) -> bool {
        (0..self.n).all(|a| (0..self.n).all(|b| (0..self.n).all(|c| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c)))))
    }
}

pub(crate) fn unflatten(mut g: usize, ns: &[usize]) -> Vec<usize> {
    let mut out = vec![0; ns.len()];
    for i in (0..ns.len()).rev() {
        out[i] = g % ns[i];
        g /= ns[i];
    }
    out
}

pub(crate) fn flatten(c: &[usize], ns: &[usize]) -> usize {
    c.iter().zip(ns).fold(0, |acc, (x, n)| acc * n + x)
}

/// A real function on the elements of a group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSignal {
    kind: GroupKind,
    values: Vec<f64>,
}

impl GroupSignal {
    pub fn new(kind: GroupKind, values: Vec<f64>) -> Result<Self> {
        kind.validate()?;
        if values.len() != kind.order() {
            return invalid(format!("signal has {} values but {} has order {}", values.len(), kind, kind.order()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("signal value at index {i} is not finite"));
        }
        Ok(GroupSignal { kind, values })
    }

    /// Entries drawn uniformly from the open unit interval.
    pub fn random(kind: &GroupKind, seed: u64) -> Result<Self> {
        kind.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..kind.order()).map(|_| rng.sample::<f64, _>(Open01)).collect();
        Ok(GroupSignal { kind: kind.clone(), values })
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &GroupSignal) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub(crate) fn check_group(&self, g: &FiniteGroup) -> Result<()> {
        if &self.kind != g.kind() {
            return invalid(format!("signal lives on {} but the group is {}", self.kind, g.kind()));
        }
        Ok(())
    }
}

/// Left translation: `act(h, s)(g) = s(h^-1 g)`.
pub fn act(group: &FiniteGroup, h: usize, signal: &GroupSignal) -> Result<GroupSignal> {
    signal.check_group(group)?;
    if h >= group.order() {
        return invalid(format!("element index {h} out of range"));
    }
    let hi = group.inv(h);
    let values = (0..group.order()).map(|g| signal.values[group.mul(hi, g)]).collect();
    Ok(GroupSignal { kind: signal.kind.clone(), values })
}

/// Distance between the orbits of two signals, `min_h |act(h, a) - b|`.
pub fn orbit_distance(group: &FiniteGroup, a: &GroupSignal, b: &GroupSignal) -> Result<f64> {
    a.check_group(group)?;
    b.check_group(group)?;
    let mut best = f64::INFINITY;
    for h in 0..group.order() {
        let hi = group.inv(h);
        let d: f64 = (0..group.order())
            .map(|g| {
                let x = a.values[group.mul(hi, g)] - b.values[g];
                x * x
            })
            .sum();
        best = best.min(d);
    }
    Ok(best.sqrt())
}
