//! Activeness of candidates as linear conditions over the optimization vector.
//!
//! Every object compiles into a *balance* form that must vanish (exactly for
//! partitioning, modulo `z` for lifting) and a list of *distinct* forms that must
//! not vanish. Distinct forms express that the lifted traversal is a simple cycle
//! (repeated protograph nodes land on different copies) and, for trapping-set
//! objects, that no two cycle variable nodes share an extra check node.

use crate::error::{Error, Result};
use crate::matrix::{EntrySpace, LiftingMatrix, PartitioningMatrix, SCProtograph};

use super::CycleCandidate;

/// Arithmetic in which forms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulus {
    /// Exact integer comparison (partitioning).
    Integer,
    /// Residues modulo `z` (lifting).
    Mod(u32),
}

impl Modulus {
    #[inline]
    pub fn is_zero(self, v: i64) -> bool {
        match self {
            Modulus::Integer => v == 0,
            Modulus::Mod(z) => v.rem_euclid(z as i64) == 0,
        }
    }
}

/// Sparse integer linear form `sum coef * x[entry]`, sorted by entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LinearForm {
    terms: Vec<(u32, i32)>,
}

impl LinearForm {
    pub fn from_terms(mut raw: Vec<(u32, i32)>) -> Self {
        raw.sort_unstable_by_key(|t| t.0);
        let mut terms: Vec<(u32, i32)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match terms.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => terms.push((e, c)),
            }
        }
        terms.retain(|t| t.1 != 0);
        LinearForm { terms }
    }

    pub fn terms(&self) -> &[(u32, i32)] {
        &self.terms
    }

    /// True when the form is identically zero.
    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn eval(&self, x: &[u32]) -> i64 {
        self.terms.iter().map(|&(e, c)| c as i64 * x[e as usize] as i64).sum()
    }

    fn sub(&self, other: &LinearForm) -> LinearForm {
        let mut raw = self.terms.clone();
        raw.extend(other.terms.iter().map(|&(e, c)| (e, -c)));
        LinearForm::from_terms(raw)
    }

    fn plus_entry(&self, e: u32) -> LinearForm {
        let mut raw = self.terms.clone();
        raw.push((e, 1));
        LinearForm::from_terms(raw)
    }
}

/// Object types the objective can count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectClass {
    Cycle4 = 0,
    Cycle6 = 1,
    Cycle8 = 2,
    /// Cycle-8 without internal connections: a `(4, 4(gamma - 2))` trapping set.
    Uts = 3,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 4] = [
        ObjectClass::Cycle4,
        ObjectClass::Cycle6,
        ObjectClass::Cycle8,
        ObjectClass::Uts,
    ];

    pub fn for_half_length(g: usize) -> Result<Self> {
        match g {
            2 => Ok(ObjectClass::Cycle4),
            3 => Ok(ObjectClass::Cycle6),
            4 => Ok(ObjectClass::Cycle8),
            _ => Err(Error::UnsupportedHalfLength(g)),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Cycle4 => "cycle4",
            ObjectClass::Cycle6 => "cycle6",
            ObjectClass::Cycle8 => "cycle8",
            ObjectClass::Uts => "uts",
        }
    }
}

/// A candidate compiled to linear conditions over the optimization vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledObject {
    pub class: ObjectClass,
    /// Id of the source candidate within its [`super::CandidateList`].
    pub candidate: u32,
    pub balance: LinearForm,
    pub distinct: Vec<LinearForm>,
    /// Sorted entries the activeness depends on.
    pub deps: Vec<u32>,
    /// Lifted cycles produced per active object, as a divisor of `z`.
    pub symmetry: u8,
}

impl CompiledObject {
    fn new(class: ObjectClass, candidate: u32, balance: LinearForm, distinct: Vec<LinearForm>, symmetry: u8) -> Self {
        let mut deps: Vec<u32> = balance
            .terms()
            .iter()
            .chain(distinct.iter().flat_map(|f| f.terms().iter()))
            .map(|t| t.0)
            .collect();
        deps.sort_unstable();
        deps.dedup();
        CompiledObject {
            class,
            candidate,
            balance,
            distinct,
            deps,
            symmetry,
        }
    }

    #[inline]
    pub fn is_active(&self, x: &[u32], modulus: Modulus) -> bool {
        modulus.is_zero(self.balance.eval(x)) && self.distinct.iter().all(|f| !modulus.is_zero(f.eval(x)))
    }

    /// True when some distinct form is identically zero, so the object can never
    /// be active.
    pub fn never_active(&self) -> bool {
        self.distinct.iter().any(LinearForm::is_trivial)
    }
}

/// Balance form of a candidate over the entries returned by `entry_of`.
fn balance_form(c: &CycleCandidate, entry_of: &dyn Fn(usize, usize) -> Result<u32>) -> Result<LinearForm> {
    let mut raw = Vec::with_capacity(2 * c.g());
    for k in 0..c.g() {
        let (i, j) = c.plus_entry(k);
        raw.push((entry_of(i, j)?, 1));
        let (i, j) = c.minus_entry(k);
        raw.push((entry_of(i, j)?, -1));
    }
    Ok(LinearForm::from_terms(raw))
}

/// Relative copy offsets of the traversal's variable nodes (`v_k`, with
/// `v_0 = 0`) and check nodes (`r_k = v_k + x(i_k, j_k)`).
fn walk_offsets(
    c: &CycleCandidate,
    entry_of: &dyn Fn(usize, usize) -> Result<u32>,
) -> Result<(Vec<LinearForm>, Vec<LinearForm>)> {
    let g = c.g();
    let mut vars = vec![LinearForm::default()];
    let mut checks = Vec::with_capacity(g);
    for k in 0..g {
        let (i, j) = c.plus_entry(k);
        let plus = entry_of(i, j)?;
        let (i2, j2) = c.minus_entry(k);
        let minus = entry_of(i2, j2)?;
        let r = vars[k].plus_entry(plus);
        if k + 1 < g {
            let mut raw = r.terms().to_vec();
            raw.push((minus, -1));
            vars.push(LinearForm::from_terms(raw));
        }
        checks.push(r);
    }
    Ok((vars, checks))
}

/// Conditions that every pair of traversal positions sharing a protograph node
/// lands on distinct copies.
fn simplicity_forms(c: &CycleCandidate, vars: &[LinearForm], checks: &[LinearForm]) -> Vec<LinearForm> {
    let g = c.g();
    let mut out = Vec::new();
    for a in 0..g {
        for b in a + 1..g {
            if c.col(a) == c.col(b) {
                out.push(vars[b].sub(&vars[a]));
            }
            if c.row(a) == c.row(b) {
                out.push(checks[b].sub(&checks[a]));
            }
        }
    }
    out
}

/// Compiles base-matrix candidates for the partitioning problem (exact balance,
/// no distinct forms).
pub fn compile_partition(c: &CycleCandidate, id: u32, space: &EntrySpace) -> Result<CompiledObject> {
    let entry_of = |i: usize, j: usize| space.entry(i, j).ok_or(Error::AbsentEntry { row: i, col: j });
    let balance = balance_form(c, &entry_of)?;
    Ok(CompiledObject::new(
        ObjectClass::for_half_length(c.g())?,
        id,
        balance,
        Vec::new(),
        c.symmetry_order() as u8,
    ))
}

fn proto_entry_of<'a>(proto: &'a SCProtograph, space: &'a EntrySpace) -> impl Fn(usize, usize) -> Result<u32> + 'a {
    move |row, col| {
        let o = proto
            .origin(row, col)
            .ok_or(Error::InvalidArgument(format!("protograph position ({row}, {col}) has no back-reference")))?;
        space.entry(o.base_row, o.base_col).ok_or(Error::AbsentEntry {
            row: o.base_row,
            col: o.base_col,
        })
    }
}

/// Compiles a protograph candidate for the lifting problem: modular balance plus
/// simplicity conditions for traversals that revisit a protograph node.
pub fn compile_lift(c: &CycleCandidate, id: u32, proto: &SCProtograph, space: &EntrySpace) -> Result<CompiledObject> {
    let entry_of = proto_entry_of(proto, space);
    let balance = balance_form(c, &entry_of)?;
    let (vars, checks) = walk_offsets(c, &entry_of)?;
    let distinct = simplicity_forms(c, &vars, &checks);
    Ok(CompiledObject::new(
        ObjectClass::for_half_length(c.g())?,
        id,
        balance,
        distinct,
        c.symmetry_order() as u8,
    ))
}

/// Compiles a protograph cycle-8 candidate as a `(4, 4(gamma - 2))` trapping-set
/// object: the cycle must be active and simple, and for every pair of its
/// variable nodes and every protograph row adjacent to both (other than the
/// cycle's own check between consecutive nodes), the lifted checks must differ.
pub fn compile_uts(c: &CycleCandidate, id: u32, proto: &SCProtograph, space: &EntrySpace) -> Result<CompiledObject> {
    if c.g() != 4 {
        return Err(Error::InvalidArgument(format!(
            "trapping-set objects are built from cycle-8 candidates, got g = {}",
            c.g()
        )));
    }
    let entry_of = proto_entry_of(proto, space);
    let balance = balance_form(c, &entry_of)?;
    let (vars, checks) = walk_offsets(c, &entry_of)?;
    let mut distinct = simplicity_forms(c, &vars, &checks);
    let h = proto.matrix();
    let g = c.g();
    for a in 0..g {
        for b in a + 1..g {
            let (ca, cb) = (c.col(a), c.col(b));
            if ca == cb {
                continue;
            }
            for row in 0..h.rows() {
                if !(h.get(row, ca) && h.get(row, cb)) {
                    continue;
                }
                let cycle_edge = (b == a + 1 && row == c.row(a)) || (a == 0 && b == g - 1 && row == c.row(b));
                if cycle_edge {
                    continue;
                }
                let lhs = vars[a].plus_entry(entry_of(row, ca)?);
                let rhs = vars[b].plus_entry(entry_of(row, cb)?);
                distinct.push(lhs.sub(&rhs));
            }
        }
    }
    Ok(CompiledObject::new(ObjectClass::Uts, id, balance, distinct, c.symmetry_order() as u8))
}

/// Eq. (2)-style test: the partition sums over `(i_k, j_k)` and `(i_k, j_{k+1})` agree.
pub fn is_active_partition(c: &CycleCandidate, p: &PartitioningMatrix) -> Result<bool> {
    let mut diff = 0i64;
    for k in 0..c.g() {
        let (i, j) = c.plus_entry(k);
        diff += p.get(i, j).ok_or(Error::AbsentEntry { row: i, col: j })? as i64;
        let (i, j) = c.minus_entry(k);
        diff -= p.get(i, j).ok_or(Error::AbsentEntry { row: i, col: j })? as i64;
    }
    Ok(diff == 0)
}

/// Lifting test for a protograph candidate: the lifting sums agree modulo `z`
/// and the lifted traversal is a simple cycle.
pub fn is_active_lift(c: &CycleCandidate, proto: &SCProtograph, lifting: &LiftingMatrix, z: usize) -> Result<bool> {
    let (space, x) = lifting_vector(proto, lifting)?;
    let obj = compile_lift(c, 0, proto, &space)?;
    Ok(obj.is_active(&x, Modulus::Mod(z as u32)))
}

/// Trapping-set test: active, simple, and without internal connections.
pub fn is_uts_active(c: &CycleCandidate, proto: &SCProtograph, lifting: &LiftingMatrix, z: usize) -> Result<bool> {
    let (space, x) = lifting_vector(proto, lifting)?;
    let obj = compile_uts(c, 0, proto, &space)?;
    Ok(obj.is_active(&x, Modulus::Mod(z as u32)))
}

fn lifting_vector(proto: &SCProtograph, lifting: &LiftingMatrix) -> Result<(EntrySpace, Vec<u32>)> {
    let mut base = crate::matrix::BinaryMatrix::zeros(proto.gamma(), proto.kappa());
    for i in 0..proto.gamma() {
        for j in 0..proto.kappa() {
            base.set(i, j, lifting.get(i, j).is_some());
        }
    }
    let space = EntrySpace::new(&base);
    let x = space.vector(lifting.grid())?;
    Ok((space, x))
}
