//! Per-group bundle of the group, its irreps, characters, Kronecker table
//! and lazily built Clebsch-Gordan matrices.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::clebsch_gordan::{self, CgDecomposition};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupKind};
use crate::representations::{CharacterTable, IrrepSet, KroneckerTable};

#[derive(Debug)]
pub struct GroupContext {
    group: FiniteGroup,
    irreps: IrrepSet,
    chars: CharacterTable,
    kron: KroneckerTable,
    cg: Vec<OnceLock<Arc<CgDecomposition>>>,
}

impl GroupContext {
    /// Builds a fresh, uncached context.
    pub fn new(kind: &GroupKind) -> Result<Self> {
        let group = FiniteGroup::new(kind)?;
        let irreps = IrrepSet::new(&group)?;
        let chars = CharacterTable::new(&group, &irreps);
        let kron = match irreps.dual() {
            Some(d) => KroneckerTable::from_dual(d),
            None => KroneckerTable::from_characters(&chars)?,
        };
        let r = irreps.len();
        Ok(GroupContext { group, irreps, chars, kron, cg: (0..r * r).map(|_| OnceLock::new()).collect() })
    }

    /// Shared context from the process-wide cache.
    pub fn get(kind: &GroupKind) -> Result<Arc<Self>> {
        static REGISTRY: OnceLock<Mutex<HashMap<GroupKind, Arc<GroupContext>>>> = OnceLock::new();
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().map_err(|_| Error::Internal("context registry poisoned".into()))?;
        if let Some(ctx) = map.get(kind) {
            return Ok(ctx.clone());
        }
        let ctx = Arc::new(GroupContext::new(kind)?);
        map.insert(kind.clone(), ctx.clone());
        Ok(ctx)
    }

    pub fn kind(&self) -> &GroupKind {
        self.group.kind()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn irreps(&self) -> &IrrepSet {
        &self.irreps
    }

    pub fn characters(&self) -> &CharacterTable {
        &self.chars
    }

    pub fn kronecker(&self) -> &KroneckerTable {
        &self.kron
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn num_irreps(&self) -> usize {
        self.irreps.len()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.irreps.get(k).dim()
    }

    pub fn label(&self, k: usize) -> &str {
        self.irreps.get(k).label()
    }

    /// Clebsch-Gordan decomposition of `rho_i (x) rho_j`, built on first use.
    pub fn cg(&self, i: usize, j: usize) -> Result<Arc<CgDecomposition>> {
        let r = self.irreps.len();
        if i >= r || j >= r {
            return Err(Error::InvalidParameter(format!("irrep pair ({i},{j}) out of range for {}", self.kind())));
        }
        let cell = &self.cg[i * r + j];
        if let Some(c) = cell.get() {
            return Ok(c.clone());
        }
        let built = Arc::new(clebsch_gordan::build(self, i, j)?);
        Ok(cell.get_or_init(|| built).clone())
    }
}
