//! Perturbed differentials, systems of higher strong homotopies, perturbing
//! systems and the comparison map `γτ = Σ_H γ^H τ^(H)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dgcore::{DGHom, Layout, ModElem, SemifreeDGModule};
use crate::error::{Error, Result};
use crate::exactlin::Echelon;
use crate::field::Field;

/// `H = (h_1..h_n)`, ordered by weight `|H|` and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(h: Vec<u32>) -> Self {
        Self(h)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut h = vec![0; n];
        h[i] = 1;
        Self(h)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&h| h == 0)
    }

    /// `H_i`: slot `i` decremented, `None` when `h_i = 0`.
    pub fn lower(&self, i: usize) -> Option<Self> {
        if self.0[i] == 0 {
            return None;
        }
        let mut h = self.0.clone();
        h[i] -= 1;
        Some(Self(h))
    }

    pub fn raise(&self, i: usize) -> Self {
        let mut h = self.0.clone();
        h[i] += 1;
        Self(h)
    }

    /// `Σ h_i d_i`.
    pub fn weighted(&self, degrees: &[i32]) -> i32 {
        self.0.iter().zip(degrees).map(|(&h, &d)| h as i32 * d).sum()
    }

    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.0.iter().zip(&other.0).map(|(&a, &b)| a.checked_sub(b)).collect::<Option<Vec<_>>>().map(Self)
    }

    /// All indices of length `n` and weight `s`, ascending lexicographically.
    pub fn of_weight(n: usize, s: u32) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if pos + 1 == n {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for h in 0..=left {
                cur[pos] = h;
                rec(pos + 1, left - h, cur, out);
            }
        }
        if n == 0 {
            if s == 0 {
                out.push(Self(Vec::new()));
            }
            return out;
        }
        rec(0, s, &mut cur, &mut out);
        out
    }

    /// All indices of length `n` and weight at most `max`, in the induction order.
    pub fn up_to(n: usize, max: u32) -> Vec<Self> {
        (0..=max).flat_map(|s| Self::of_weight(n, s)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight().cmp(&other.weight()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl core::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "(")?;
        for (i, h) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", h)?;
        }
        write!(f, ")")
    }
}

/// `X^δ`: the same generators with differential `∂ + δ`. Rejects `δ` that is
/// not a degree `(-1, 0)` cycle with `δ² = 0`.
pub fn perturb<F: Field>(x: &SemifreeDGModule<F>, delta: &DGHom<F::Elem>) -> Result<SemifreeDGModule<F>> {
    if (delta.hshift, delta.ishift) != (-1, 0) {
        return Err(Error::DegreeMismatch { expected: (-1, 0), found: (delta.hshift, delta.ishift) });
    }
    let br = x.d_bracket(delta);
    if let Some(a) = first_nonzero(&br) {
        return Err(Error::NotACycle { witness: x.generators()[a].label.clone() });
    }
    let sq = x.compose(delta, delta);
    if let Some(a) = first_nonzero(&sq) {
        return Err(Error::NotSquareZero { witness: x.generators()[a].label.clone() });
    }
    let field = x.field();
    let diff = (0..x.rank())
        .map(|a| {
            let d = delta.image(a).ok_or_else(|| Error::WindowTooSmall(format!("delta undefined on {}", x.generators()[a].label)))?;
            Ok(x.generator_differential(a).add(field, d))
        })
        .collect::<Result<Vec<_>>>()?;
    SemifreeDGModule::new(x.algebra().clone(), x.generators().to_vec(), diff, x.window())
}

fn first_nonzero<E: Clone>(h: &DGHom<E>) -> Option<usize> {
    h.images().iter().position(|x| x.as_ref().is_some_and(|x| !x.is_zero()))
}

/// The family `τ^(H)`, `|H| <= max_weight`, with `τ^(0) = id` and
/// `[∂, τ^(H)] = Σ_i τ^(H_i) α_i - β_i τ^(H_i)` (terms with `h_i = 0` absent).
#[derive(Clone, Debug)]
pub struct HomotopySystem<E> {
    pub alphas: Vec<DGHom<E>>,
    pub betas: Vec<DGHom<E>>,
    pub max_weight: u32,
    tau: BTreeMap<MultiIndex, DGHom<E>>,
}

impl<E: Clone> HomotopySystem<E> {
    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn tau(&self, h: &MultiIndex) -> Option<&DGHom<E>> {
        self.tau.get(h)
    }

    pub fn indices(&self) -> impl Iterator<Item = &MultiIndex> {
        self.tau.keys()
    }

    /// Assemble from precomputed maps (e.g. transported from another module).
    pub fn from_parts(
        alphas: Vec<DGHom<E>>,
        betas: Vec<DGHom<E>>,
        max_weight: u32,
        tau: BTreeMap<MultiIndex, DGHom<E>>,
    ) -> Self {
        Self { alphas, betas, max_weight, tau }
    }

    /// Same `τ` with each map transformed (e.g. base change).
    pub fn map_taus(&self, mut f: impl FnMut(&MultiIndex, &DGHom<E>) -> DGHom<E>) -> BTreeMap<MultiIndex, DGHom<E>> {
        self.tau.iter().map(|(h, t)| (h.clone(), f(h, t))).collect()
    }
}

/// Cache of echelon forms of `∂` on bidegree pieces, for solving `∂y = b`.
pub struct BoundarySolver<'a, F: Field> {
    module: &'a SemifreeDGModule<F>,
    cache: BTreeMap<(i32, i32), (Layout, Layout, Echelon<F>)>,
}

impl<'a, F: Field> BoundarySolver<'a, F> {
    pub fn new(module: &'a SemifreeDGModule<F>) -> Self {
        Self { module, cache: BTreeMap::new() }
    }

    /// Deterministic `y` in bidegree `(h, j)` with `∂y = b`, if any.
    pub fn solve(&mut self, h: i32, j: i32, b: &ModElem<F::Elem>) -> Option<ModElem<F::Elem>> {
        let m = self.module;
        let (src, tgt, ech) = self.cache.entry((h, j)).or_insert_with(|| {
            let src = m.layout(h, j);
            let tgt = m.layout(h - 1, j);
            let cols = m.d_matrix(&src, &tgt);
            let ech = Echelon::from_columns(m.field().clone(), tgt.total, &cols);
            (src, tgt, ech)
        });
        if b.is_zero() {
            return Some(ModElem::zero());
        }
        let v = m.coords(tgt, b);
        let sol = ech.solve(&v)?;
        Some(m.from_coords(src, &sol))
    }
}

/// Hom degree of `τ^(H)`: `(|H|(d+1), Σ h_i ishift_i)`.
fn tau_shift<E: Clone>(alphas: &[DGHom<E>], h: &MultiIndex) -> (i32, i32) {
    let d = alphas.first().map(|a| a.hshift).unwrap_or(1);
    let ish: Vec<i32> = alphas.iter().map(|a| a.ishift).collect();
    (h.weight() as i32 * (d + 1), h.weighted(&ish))
}

/// `Σ_i τ^(H_i)(α_i x) - β_i(τ^(H_i)(x))` on a generator.
fn homotopy_rhs<F: Field>(
    m: &SemifreeDGModule<F>,
    alphas: &[DGHom<F::Elem>],
    betas: &[DGHom<F::Elem>],
    tau: &BTreeMap<MultiIndex, DGHom<F::Elem>>,
    h: &MultiIndex,
    a: usize,
) -> Option<ModElem<F::Elem>> {
    let field = m.field();
    let one = crate::graded::Poly::one(field);
    let e = ModElem::basis(a, 0, one);
    let mut out = ModElem::zero();
    for i in 0..h.len() {
        let Some(hi) = h.lower(i) else { continue };
        let t = tau.get(&hi)?;
        let ae = m.eval(&alphas[i], &e)?;
        out.add_assign(field, &m.eval(t, &ae)?);
        let te = m.eval(t, &e)?;
        out.sub_assign(field, &m.eval(&betas[i], &te)?);
    }
    Some(out)
}

/// Solve for `τ^(H)` generator by generator along the semifree filtration,
/// `|H|` ascending and lexicographic within a weight.
pub fn build_higher_homotopies<F: Field>(
    m: &SemifreeDGModule<F>,
    alphas: Vec<DGHom<F::Elem>>,
    betas: Vec<DGHom<F::Elem>>,
    max_weight: u32,
) -> Result<HomotopySystem<F::Elem>> {
    if alphas.len() != betas.len() {
        return Err(Error::DimensionMismatch(format!("{} alphas but {} betas", alphas.len(), betas.len())));
    }
    let d = alphas.first().map(|a| a.hshift).unwrap_or(1);
    for (a, b) in alphas.iter().zip(&betas) {
        if a.hshift != d || b.hshift != d || d < 1 || d % 2 == 0 {
            return Err(Error::DegreeMismatch { expected: (d, a.ishift), found: (b.hshift, b.ishift) });
        }
        if a.ishift != b.ishift {
            return Err(Error::DegreeMismatch { expected: (d, a.ishift), found: (b.hshift, b.ishift) });
        }
    }
    let n = alphas.len();
    let mut order: Vec<usize> = (0..m.rank()).collect();
    order.sort_by_key(|&a| m.generators()[a].hdeg);
    let mut tau: BTreeMap<MultiIndex, DGHom<F::Elem>> = BTreeMap::new();
    tau.insert(MultiIndex::zero(n), m.hom_identity());
    let mut solver = BoundarySolver::new(m);
    let window = m.window();
    for h in MultiIndex::up_to(n, max_weight).into_iter().skip(1) {
        let (hs, is) = tau_shift(&alphas, &h);
        let mut t = m.hom_empty(hs, is);
        for &a in &order {
            let g = &m.generators()[a];
            if !window.contains(g.hdeg + hs, g.ideg + is) {
                continue;
            }
            let obstruction = || Error::ObstructionFound { index: h.entries().to_vec(), hdeg: g.hdeg + hs, ideg: g.ideg + is };
            let mut target = homotopy_rhs(m, &alphas, &betas, &tau, &h, a).ok_or_else(obstruction)?;
            // τ(∂e) only involves generators of lower homological degree
            let tde = m.eval(&t, m.generator_differential(a)).ok_or_else(obstruction)?;
            target.add_assign(m.field(), &tde);
            let y = solver.solve(g.hdeg + hs, g.ideg + is, &target).ok_or_else(obstruction)?;
            t.set_image(a, y);
        }
        tau.insert(h, t);
    }
    Ok(HomotopySystem { alphas, betas, max_weight, tau })
}

/// First stored `H` (and generator) where the defining identity of the
/// system fails.
pub fn check_homotopy_system<F: Field>(
    m: &SemifreeDGModule<F>,
    sys: &HomotopySystem<F::Elem>,
) -> core::result::Result<(), (MultiIndex, String)> {
    let field = m.field();
    for (h, t) in &sys.tau {
        if h.is_zero() {
            if m.hom_difference_witness(t, &m.hom_identity()).is_some() {
                return Err((h.clone(), "tau^(0) is not the identity".into()));
            }
            continue;
        }
        let lhs = m.d_bracket(t);
        for a in 0..m.rank() {
            let Some(l) = lhs.image(a) else { continue };
            let Some(r) = homotopy_rhs(m, &sys.alphas, &sys.betas, &sys.tau, h, a) else { continue };
            if !l.sub(field, &r).is_zero() {
                return Err((h.clone(), m.generators()[a].label.clone()));
            }
        }
    }
    Ok(())
}

/// Perturbing system on `X`: `α_i, β_i` odd, `γ_i` central of degree
/// `-d-1`, and a homotopy system `τ` for `(α, β)`. `δ = Σ γ_i α_i`,
/// `ε = Σ γ_i β_i` (computed as `α_i γ_i`, `β_i γ_i`, which agree by
/// centrality and stay inside the window at the top degree).
#[derive(Clone, Debug)]
pub struct PerturbingSystem<E> {
    pub gammas: Vec<DGHom<E>>,
    pub tau: HomotopySystem<E>,
    pub delta: DGHom<E>,
    pub epsilon: DGHom<E>,
}

impl<E: Clone> PerturbingSystem<E> {
    pub fn new<F: Field<Elem = E>>(x: &SemifreeDGModule<F>, gammas: Vec<DGHom<E>>, tau: HomotopySystem<E>) -> Result<Self> {
        if gammas.len() != tau.n() {
            return Err(Error::DimensionMismatch(format!("{} gammas for {} alphas", gammas.len(), tau.n())));
        }
        let delta = sum_of_composites(x, &tau.alphas, &gammas)?;
        let epsilon = sum_of_composites(x, &tau.betas, &gammas)?;
        Ok(Self { gammas, tau, delta, epsilon })
    }
}

fn sum_of_composites<F: Field>(
    x: &SemifreeDGModule<F>,
    outer: &[DGHom<F::Elem>],
    inner: &[DGHom<F::Elem>],
) -> Result<DGHom<F::Elem>> {
    let mut acc = x.hom_zero(-1, 0);
    for (o, i) in outer.iter().zip(inner) {
        let c = x.compose(o, i);
        if (c.hshift, c.ishift) != (-1, 0) {
            return Err(Error::DegreeMismatch { expected: (-1, 0), found: (c.hshift, c.ishift) });
        }
        acc = x.hom_add(&acc, &c)?;
    }
    Ok(acc)
}

/// One line of a validation report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Largest weight `s` such that `γ^H(e) != 0` for some `|H| = s`, per
/// generator, or `None` if it never vanishes within `bound` steps.
pub fn gamma_nilpotency<F: Field>(x: &SemifreeDGModule<F>, gammas: &[DGHom<F::Elem>], a: usize, bound: u32) -> Option<u32> {
    let field = x.field();
    let mut layer: BTreeMap<MultiIndex, ModElem<F::Elem>> = BTreeMap::new();
    layer.insert(MultiIndex::zero(gammas.len()), ModElem::basis(a, 0, crate::graded::Poly::one(field)));
    let mut s = 0;
    loop {
        if s > bound {
            return None;
        }
        let mut next: BTreeMap<MultiIndex, ModElem<F::Elem>> = BTreeMap::new();
        for (h, v) in &layer {
            for (i, g) in gammas.iter().enumerate() {
                let hi = h.raise(i);
                if next.contains_key(&hi) {
                    continue;
                }
                let Some(img) = x.eval(g, v) else { continue };
                if !img.is_zero() {
                    next.insert(hi, img);
                }
            }
        }
        if next.is_empty() {
            return Some(s);
        }
        layer = next;
        s += 1;
    }
}

/// Checks the defining conditions of a perturbing system within the window.
pub fn validate_perturbing_system<F: Field>(x: &SemifreeDGModule<F>, sys: &PerturbingSystem<F::Elem>) -> Vec<Check> {
    let mut out = Vec::new();
    let d = sys.tau.alphas.first().map(|a| a.hshift).unwrap_or(1);
    let degrees_ok = sys.tau.alphas.iter().chain(&sys.tau.betas).all(|a| a.hshift == d && d % 2 == 1)
        && sys.gammas.iter().all(|g| g.hshift == -d - 1);
    out.push(Check::new("degrees", degrees_ok, format!("alpha, beta of degree {}, gamma of degree {}", d, -d - 1)));

    let hs = match check_homotopy_system(x, &sys.tau) {
        Ok(()) => Check::new("strong_homotopies", true, format!("identity holds for all |H| <= {}", sys.tau.max_weight)),
        Err((h, w)) => Check::new("strong_homotopies", false, format!("fails for H = {} on {}", h, w)),
    };
    out.push(hs);

    for (name, p) in [("delta", &sys.delta), ("epsilon", &sys.epsilon)] {
        let br = x.d_bracket(p);
        let cyc = first_nonzero(&br);
        out.push(Check::new(
            &format!("{}_cycle", name),
            cyc.is_none(),
            cyc.map(|a| format!("[d, {}] nonzero on {}", name, x.generators()[a].label)).unwrap_or_default(),
        ));
        let sq = x.compose(p, p);
        let nz = first_nonzero(&sq);
        out.push(Check::new(
            &format!("{}_square_zero", name),
            nz.is_none(),
            nz.map(|a| format!("{}^2 nonzero on {}", name, x.generators()[a].label)).unwrap_or_default(),
        ));
    }

    // centrality against the maps the construction uses
    let mut used: Vec<&DGHom<F::Elem>> = Vec::new();
    used.extend(sys.gammas.iter());
    used.extend(sys.tau.alphas.iter());
    used.extend(sys.tau.betas.iter());
    used.extend(sys.tau.tau.values());
    let mut central = None;
    for (i, g) in sys.gammas.iter().enumerate() {
        if first_nonzero(&x.d_bracket(g)).is_some() {
            central = Some(format!("gamma_{} is not a chain map", i + 1));
            break;
        }
        if let Some(k) = used.iter().position(|s| !x.hom_is_zero(&x.bracket(g, s))) {
            central = Some(format!("gamma_{} does not commute with map #{}", i + 1, k));
            break;
        }
    }
    out.push(Check::new("gamma_central", central.is_none(), central.unwrap_or_default()));

    let bound = (x.window().max_hdeg.max(0) as u32) + 1;
    let stuck = (0..x.rank()).find(|&a| gamma_nilpotency(x, &sys.gammas, a, bound).is_none());
    out.push(Check::new(
        "gamma_nilpotent",
        stuck.is_none(),
        stuck.map(|a| format!("gamma^H does not vanish on {}", x.generators()[a].label)).unwrap_or_default(),
    ));
    out
}

/// `γτ(e) = Σ_H τ^(H)(γ^H e)` on each generator; a degree-zero map
/// `X^δ → X^ε` on the common underlying module.
pub fn gamma_tau<F: Field>(x: &SemifreeDGModule<F>, sys: &PerturbingSystem<F::Elem>) -> Result<DGHom<F::Elem>> {
    let field = x.field();
    let n = sys.gammas.len();
    let mut out = x.hom_empty(0, 0);
    for a in 0..x.rank() {
        let mut total = ModElem::basis(a, 0, crate::graded::Poly::one(field));
        let mut layer: BTreeMap<MultiIndex, ModElem<F::Elem>> = BTreeMap::new();
        layer.insert(MultiIndex::zero(n), total.clone());
        let mut s = 0u32;
        loop {
            let mut next: BTreeMap<MultiIndex, ModElem<F::Elem>> = BTreeMap::new();
            for (h, v) in &layer {
                for (i, g) in sys.gammas.iter().enumerate() {
                    let hi = h.raise(i);
                    if next.contains_key(&hi) {
                        continue;
                    }
                    let img = x
                        .eval(g, v)
                        .ok_or_else(|| Error::WindowTooSmall(format!("gamma undefined below {}", x.generators()[a].label)))?;
                    if !img.is_zero() {
                        next.insert(hi, img);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            s += 1;
            if s > sys.tau.max_weight {
                return Err(Error::TruncationTooSmall { stored: sys.tau.max_weight, needed: s });
            }
            for (h, v) in &next {
                let t = sys.tau.tau(h).ok_or(Error::TruncationTooSmall { stored: sys.tau.max_weight, needed: s })?;
                let img = x.eval(t, v).ok_or_else(|| {
                    Error::WindowTooSmall(format!("tau^{} undefined below {}", h, x.generators()[a].label))
                })?;
                total.add_assign(field, &img);
            }
            layer = next;
        }
        out.set_image(a, total);
    }
    Ok(out)
}

/// First generator on which `φ` fails to intertwine the differentials of
/// `source` and `target` (same underlying module).
pub fn check_chain_map<F: Field>(
    source: &SemifreeDGModule<F>,
    target: &SemifreeDGModule<F>,
    phi: &DGHom<F::Elem>,
) -> Result<()> {
    for a in 0..source.rank() {
        let Some(img) = phi.image(a) else { continue };
        let lhs = target.apply_d(img);
        let Some(rhs) = target.eval(phi, source.generator_differential(a)) else { continue };
        let rhs = if phi.hshift.rem_euclid(2) == 1 { rhs.neg(source.field()) } else { rhs };
        if lhs != rhs {
            return Err(Error::NotAChainMap { witness: source.generators()[a].label.clone() });
        }
    }
    Ok(())
}

/// Whether `φ(e_a) - e_a` only involves generators of strictly lower level.
pub fn is_unitriangular<F: Field>(x: &SemifreeDGModule<F>, phi: &DGHom<F::Elem>, level: impl Fn(usize) -> u32) -> bool {
    let field = x.field();
    (0..x.rank()).all(|a| {
        let Some(img) = phi.image(a) else { return true };
        let diff = img.sub(field, &ModElem::basis(a, 0, crate::graded::Poly::one(field)));
        let lower = diff.terms().all(|(b, _, _)| level(b) < level(a));
        lower
    })
}

/// Every bidegree piece of the degree-zero map `φ` is invertible, for
/// `h <= max_hdeg`, `j <= max_ideg`.
pub fn check_iso_degreewise<F: Field>(x: &SemifreeDGModule<F>, phi: &DGHom<F::Elem>, max_hdeg: i32, max_ideg: i32) -> bool {
    if (phi.hshift, phi.ishift) != (0, 0) {
        return false;
    }
    let lo = x.generators().iter().map(|g| g.ideg).min().unwrap_or(0);
    for h in 0..=max_hdeg {
        for j in lo..=max_ideg {
            let layout = x.layout(h, j);
            if layout.total == 0 {
                continue;
            }
            let mut ech = Echelon::new(x.field().clone(), layout.total);
            for i in 0..layout.total {
                let Some(img) = x.eval(phi, &x.basis_element(&layout, i)) else { return false };
                ech.insert(&x.coords(&layout, &img));
            }
            if ech.rank() != layout.total {
                return false;
            }
        }
    }
    true
}
