//! Degree-by-degree semifree resolutions over Koszul-type algebras, strong
//! resolutions over `B = Λ⟨ζ⟩`, divided-power tensors `Γ ⊗ F` and universal
//! resolutions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::dgcore::{DGHom, Generator, KoszulAlgebra, ModElem, SemifreeDGModule, Window};
use crate::error::{Error, Result, StageExt};
use crate::exactlin::{sparse_kernel, Echelon, Insertion, SparseVec};
use crate::field::Field;
use crate::graded::{ModulePresentation, Poly, PresentedModule, Ring};
use crate::perturb::MultiIndex;

/// Homological and internal degree bounds of a computation. Complexes are
/// built through homological degree `max_hdeg + 1` so homology at
/// `max_hdeg` is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolutionWindow {
    pub max_hdeg: i32,
    pub max_ideg: i32,
}

impl ResolutionWindow {
    pub fn new(max_hdeg: i32, max_ideg: i32) -> Result<Self> {
        if max_hdeg < 0 || max_ideg < 0 {
            return Err(Error::Invalid(format!("window ({}, {}) must be nonnegative", max_hdeg, max_ideg)));
        }
        Ok(Self { max_hdeg, max_ideg })
    }

    pub fn top(&self) -> i32 {
        self.max_hdeg + 1
    }

    pub fn build_window(&self) -> Window {
        Window { max_hdeg: self.top(), max_ideg: self.max_ideg }
    }
}

/// A semifree module with an augmentation onto a presented module; the
/// degree-0 generators map to the module generators in order.
#[derive(Clone, Debug)]
pub struct Resolution<F: Field> {
    pub module: SemifreeDGModule<F>,
    pub target: PresentedModule<F>,
}

impl<F: Field> Resolution<F> {
    /// Number of generators in each homological degree.
    pub fn ranks(&self) -> Vec<usize> {
        let top = self.module.window().max_hdeg.max(0) as usize;
        let mut out = vec![0; top + 1];
        for g in self.module.generators() {
            out[g.hdeg as usize] += 1;
        }
        out
    }

    /// Columns of the augmentation `F_{0,j} → M_j`.
    pub fn augmentation_matrix(&self, j: i32) -> (usize, Vec<SparseVec<F::Elem>>) {
        augmentation(&self.module, &self.target, j)
    }
}

fn augmentation<F: Field>(
    module: &SemifreeDGModule<F>,
    target: &PresentedModule<F>,
    j: i32,
) -> (usize, Vec<SparseVec<F::Elem>>) {
    let field = module.field();
    let layout = module.layout(0, j);
    let piece = target.piece(j);
    let mut cols = Vec::with_capacity(layout.total);
    for b in &layout.blocks {
        for k in 0..b.dim {
            let amb = vec![(piece.ambient.offsets[b.generator] + k, field.one())];
            cols.push(target.reduce_in(&piece, &amb));
        }
    }
    (piece.dim(), cols)
}

/// Minimal semifree resolution of `m` over `algebra` through the window:
/// in each homological degree and each internal degree (ascending), cycles
/// not yet bounded get new generators, chosen by echelon pivots.
pub fn semifree_resolution<F: Field>(
    algebra: Arc<KoszulAlgebra<F>>,
    m: &PresentedModule<F>,
    w: ResolutionWindow,
) -> Result<Resolution<F>> {
    let gens = m.presentation().generators().to_vec();
    if let Some(&d) = gens.iter().find(|&&d| d > w.max_ideg) {
        return Err(Error::WindowTooSmall(format!(
            "module generator in degree {} exceeds the internal window {}",
            d, w.max_ideg
        )));
    }
    for k in 0..algebra.ngens() {
        if !m.annihilated_by(algebra.boundary(k)) {
            return Err(Error::AnnihilatorViolation(format!(
                "{} = {} does not annihilate the module",
                algebra.name(k),
                algebra.ring().render(algebra.boundary(k))
            )));
        }
    }
    let window = w.build_window();
    let f0: Vec<Generator> = gens
        .iter()
        .enumerate()
        .map(|(i, &d)| Generator { hdeg: 0, ideg: d, label: format!("e0.{}", i) })
        .collect();
    let diff0 = vec![ModElem::zero(); f0.len()];
    let mut module = SemifreeDGModule::new_unchecked(algebra, f0, diff0, window)?;
    let lo = gens.iter().copied().min().unwrap_or(0);
    let field = module.field().clone();
    for p in 1..=window.max_hdeg {
        let mut count = 0;
        for j in lo..=w.max_ideg {
            let src = module.layout(p - 1, j);
            let cycles = if p == 1 {
                let (rows, cols) = augmentation(&module, m, j);
                sparse_kernel(&field, rows, &cols)
            } else {
                let tgt = module.layout(p - 2, j);
                let cols = module.d_matrix(&src, &tgt);
                sparse_kernel(&field, tgt.total, &cols)
            };
            if cycles.is_empty() {
                continue;
            }
            let here = module.layout(p, j);
            let boundaries = module.d_matrix(&here, &src);
            let mut ech = Echelon::new(field.clone(), src.total);
            for b in &boundaries {
                ech.insert(b);
            }
            for z in cycles {
                if matches!(ech.insert(&z), Insertion::Pivot) {
                    let d = module.from_coords(&src, &z);
                    module.push_generator(Generator { hdeg: p, ideg: j, label: format!("e{}.{}", p, count) }, d);
                    count += 1;
                }
            }
        }
    }
    module.check_square_zero()?;
    Ok(Resolution { module, target: m.clone() })
}

/// `H_i(E) = 0` for `i >= 1` in internal degrees up to `max_ideg`; on failure
/// the first nonzero `(i, j)`.
pub fn koszul_homology_witness<F: Field>(e: &Arc<KoszulAlgebra<F>>, max_ideg: i32) -> Option<(i32, i32)> {
    let n = e.ngens() as i32;
    if n == 0 {
        return None;
    }
    let one = SemifreeDGModule::new(
        e.clone(),
        vec![Generator { hdeg: 0, ideg: 0, label: "1".into() }],
        vec![ModElem::zero()],
        Window { max_hdeg: n + 1, max_ideg },
    )
    .expect("the algebra over itself is a DG module");
    let dims = one.homology_dims(n, max_ideg).expect("window covers the Koszul complex");
    dims.keys().copied().filter(|&(i, _)| i >= 1).min_by_key(|&(i, j)| (j, i))
}

pub fn koszul_regular_up_to<F: Field>(e: &Arc<KoszulAlgebra<F>>, max_ideg: i32) -> bool {
    koszul_homology_witness(e, max_ideg).is_none()
}

/// `f_i - f'_i = Σ_j x_{i,j} g_{i,j}`: one summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness<E> {
    pub i: usize,
    pub j: usize,
    pub x: Poly<E>,
    pub g: Poly<E>,
}

/// Which of the two sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sequence {
    F,
    FPrime,
}

/// Input data: `Q`, `I`, `f`, `f'`, witnesses, `M`, `N` (presented over `Q`;
/// relations `I·gens` are added) and the window.
#[derive(Clone, Debug)]
pub struct ScenarioSpec<F: Field> {
    pub q: Arc<Ring<F>>,
    pub ideal: Vec<Poly<F::Elem>>,
    pub f: Vec<Poly<F::Elem>>,
    pub f_prime: Vec<Poly<F::Elem>>,
    pub witnesses: Vec<Witness<F::Elem>>,
    pub m: ModulePresentation<F::Elem>,
    pub n: ModulePresentation<F::Elem>,
    pub window: ResolutionWindow,
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario<F: Field> {
    spec: ScenarioSpec<F>,
    r: Arc<Ring<F>>,
    m_q: PresentedModule<F>,
    n_r: PresentedModule<F>,
    degrees: Vec<i32>,
}

impl<F: Field> Scenario<F> {
    pub fn new(mut spec: ScenarioSpec<F>) -> Result<Self> {
        let q = spec.q.clone();
        let field = q.field().clone();
        let weights = q.base().weights().to_vec();
        let d = spec.window.max_ideg;
        if spec.f.len() != spec.f_prime.len() {
            return Err(Error::Invalid(format!(
                "f has {} elements but f' has {}",
                spec.f.len(),
                spec.f_prime.len()
            )));
        }
        let mut degrees = Vec::new();
        for (i, (f, fp)) in spec.f.iter().zip(&spec.f_prime).enumerate() {
            let df = f
                .homogeneous_degree(&weights)
                .filter(|_| !f.is_zero())
                .ok_or_else(|| Error::NotHomogeneous(format!("f{} must be nonzero and homogeneous", i + 1)))?;
            if !fp.is_zero() && !fp.is_homogeneous_of(&weights, df as i32) {
                return Err(Error::NotHomogeneous(format!("f'{} must be homogeneous of degree {}", i + 1, df)));
            }
            degrees.push(df as i32);
        }
        if spec.ideal.iter().all(|g| g.is_zero()) {
            spec.ideal = spec.f.iter().chain(&spec.f_prime).filter(|p| !p.is_zero()).cloned().collect();
        }
        let r = Arc::new(q.quotient_by(&spec.ideal, d)?);
        for (name, seq) in [("f", &spec.f), ("f'", &spec.f_prime)] {
            for (i, p) in seq.iter().enumerate() {
                if !r.is_zero_elem(p) {
                    return Err(Error::NotInIdeal(format!("{}{} = {} is not in I", name, i + 1, q.render(p))));
                }
            }
        }
        let mut sums = vec![Poly::zero(); spec.f.len()];
        for w in &spec.witnesses {
            if w.i >= spec.f.len() {
                return Err(Error::WitnessInvalid(format!("witness index {} out of range", w.i + 1)));
            }
            let target = degrees[w.i];
            let dx = w.x.homogeneous_degree(&weights);
            let dg = w.g.homogeneous_degree(&weights);
            let ok = w.x.is_zero() || w.g.is_zero() || matches!((dx, dg), (Some(a), Some(b)) if (a + b) as i32 == target);
            if !ok {
                return Err(Error::WitnessInvalid(format!(
                    "x{0}{1} * g{0}{1} is not homogeneous of degree {2}",
                    w.i + 1,
                    w.j + 1,
                    target
                )));
            }
            if !r.is_zero_elem(&w.x) {
                return Err(Error::NotInIdeal(format!("x{}{} = {} is not in I", w.i + 1, w.j + 1, q.render(&w.x))));
            }
            sums[w.i] = sums[w.i].add(&field, &w.x.mul(&field, &w.g));
        }
        for (i, s) in sums.iter().enumerate() {
            let diff = spec.f[i].sub(&field, &spec.f_prime[i]);
            if *s != diff {
                return Err(Error::WitnessInvalid(format!(
                    "f{0} - f'{0} = {1} but the witnesses sum to {2}",
                    i + 1,
                    q.render(&diff),
                    q.render(s)
                )));
            }
        }
        for (name, pres) in [("M", &spec.m), ("N", &spec.n)] {
            if let Some(&g) = pres.generators().iter().find(|&&g| g < 0 || g > d) {
                return Err(Error::WindowTooSmall(format!(
                    "{} has a generator in degree {}; generators must lie in [0, {}]",
                    name, g, d
                )));
            }
        }
        let m_q = PresentedModule::new(q.clone(), spec.m.with_ideal_relations(&q, &spec.ideal), d);
        for w in &spec.witnesses {
            if !m_q.annihilated_by(&w.g) {
                return Err(Error::AnnihilatorViolation(format!(
                    "g{}{} = {} does not annihilate M",
                    w.i + 1,
                    w.j + 1,
                    q.render(&w.g)
                )));
            }
        }
        let n_r = PresentedModule::new(r.clone(), spec.n.clone(), d);
        Ok(Self { spec, r, m_q, n_r, degrees })
    }

    pub fn spec(&self) -> &ScenarioSpec<F> {
        &self.spec
    }

    pub fn q(&self) -> &Arc<Ring<F>> {
        &self.spec.q
    }

    /// `R = Q/I`.
    pub fn r(&self) -> &Arc<Ring<F>> {
        &self.r
    }

    pub fn window(&self) -> ResolutionWindow {
        self.spec.window
    }

    pub fn n_seq(&self) -> usize {
        self.spec.f.len()
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    pub fn sequence(&self, which: Sequence) -> &[Poly<F::Elem>] {
        match which {
            Sequence::F => &self.spec.f,
            Sequence::FPrime => &self.spec.f_prime,
        }
    }

    /// `f' = 0`: the scenario exhibits `f ⊆ I·ann(M)`.
    pub fn is_annihilator_variant(&self) -> bool {
        self.spec.f_prime.iter().all(|p| p.is_zero())
    }

    /// `M` over `Q` (with the relations `I·gens`).
    pub fn m_over_q(&self) -> &PresentedModule<F> {
        &self.m_q
    }

    /// `N` over `R`.
    pub fn n_over_r(&self) -> &PresentedModule<F> {
        &self.n_r
    }

    /// The Koszul complex on one of the sequences, over `Q`.
    pub fn koszul(&self, which: Sequence) -> Result<Arc<KoszulAlgebra<F>>> {
        let prefix = match which {
            Sequence::F => "xi",
            Sequence::FPrime => "xi'",
        };
        Ok(Arc::new(KoszulAlgebra::koszul(self.q().clone(), prefix, self.sequence(which))?))
    }

    /// Koszul-regularity of a sequence, with the first nonzero `H_i(E)_j`.
    pub fn check_regular(&self, which: Sequence) -> Result<Option<(i32, i32)>> {
        let seq: Vec<_> = self.sequence(which).iter().filter(|p| !p.is_zero()).cloned().collect();
        let e = Arc::new(KoszulAlgebra::koszul(self.q().clone(), "xi", &seq)?);
        Ok(koszul_homology_witness(&e, self.window().max_ideg))
    }

    pub fn require_regular(&self, which: Sequence) -> Result<()> {
        match self.check_regular(which)? {
            None => Ok(()),
            Some((hdeg, ideg)) => Err(Error::NotKoszulRegular { hdeg, ideg }),
        }
    }

    /// The same scenario with the witness list reordered.
    pub fn permuted(&self, witness_order: &[usize]) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.witnesses = witness_order.iter().map(|&k| self.spec.witnesses[k].clone()).collect();
        Self::new(spec)
    }
}

/// Resolution of `M` over `B = Q⟨ξ, ξ', ζ | ∂ξ = f, ∂ξ' = f', ∂ζ_{ij} = g_ij⟩`.
/// When `f' = 0` the `ξ'` generators are omitted.
#[derive(Clone, Debug)]
pub struct StrongResolution<F: Field> {
    pub algebra: Arc<KoszulAlgebra<F>>,
    pub resolution: Resolution<F>,
    pub xi: Vec<usize>,
    pub xi_prime: Option<Vec<usize>>,
    /// `(i, j, generator index, x_ij)` for each witness with `g ≠ 0`
    pub zeta: Vec<(usize, usize, usize, Poly<F::Elem>)>,
}

pub fn strong_lambda_resolution<F: Field>(s: &Scenario<F>) -> Result<StrongResolution<F>> {
    let q = s.q().clone();
    let n = s.n_seq();
    let mut gens = Vec::new();
    for i in 0..n {
        gens.push((format!("xi{}", i + 1), s.spec.f[i].clone(), s.degrees[i]));
    }
    let with_prime = !s.is_annihilator_variant();
    if with_prime {
        for i in 0..n {
            gens.push((format!("xi'{}", i + 1), s.spec.f_prime[i].clone(), s.degrees[i]));
        }
    }
    let weights = q.base().weights().to_vec();
    let mut zeta = Vec::new();
    for w in &s.spec.witnesses {
        if w.g.is_zero() || w.x.is_zero() {
            continue;
        }
        let dg = w.g.homogeneous_degree(&weights).expect("validated witness") as i32;
        zeta.push((w.i, w.j, gens.len(), w.x.clone()));
        gens.push((format!("zeta{}_{}", w.i + 1, w.j + 1), w.g.clone(), dg));
    }
    let algebra = Arc::new(KoszulAlgebra::new(q, gens)?);
    let resolution = semifree_resolution(algebra.clone(), s.m_over_q(), s.window()).stage("strong resolution")?;
    Ok(StrongResolution {
        algebra,
        resolution,
        xi: (0..n).collect(),
        xi_prime: with_prime.then(|| (n..2 * n).collect()),
        zeta,
    })
}

/// `Γ_trunc ⊗ F` over `R = Q/J`: generators `y^(H) ⊗ e_a` inside the window,
/// differential `1 ⊗ ∂` (optionally plus `Σ χ_i ⊗ λ_{s_i}`), with the
/// divided-power operators `χ_i`.
#[derive(Clone, Debug)]
pub struct DividedPowerTensor<F: Field> {
    pub module: SemifreeDGModule<F>,
    pub labels: Vec<(MultiIndex, usize)>,
    pub index: BTreeMap<(MultiIndex, usize), usize>,
    /// exterior generator paired with each `y_i`
    pub seq: Vec<usize>,
    pub degrees: Vec<i32>,
    pub chis: Vec<DGHom<F::Elem>>,
}

impl<F: Field> DividedPowerTensor<F> {
    pub fn level(&self, a: usize) -> u32 {
        self.labels[a].0.weight()
    }

    /// Generators `y^(H) ⊗ e_a` of `Γ_trunc ⊗ F` for a module `F` over `Q`,
    /// base-changed to `ring`.
    pub fn new(f: &SemifreeDGModule<F>, ring: Arc<Ring<F>>, seq: &[usize], perturbed: bool) -> Result<Self> {
        let algebra = Arc::new(f.algebra().base_change(ring.clone())?);
        let window = f.window();
        let n = seq.len();
        let degrees: Vec<i32> = seq.iter().map(|&k| f.algebra().degree(k)).collect();
        let mut labels = Vec::new();
        let mut gens = Vec::new();
        let mut index = BTreeMap::new();
        let max_weight = (window.max_hdeg.max(0) / 2) as u32;
        for h in MultiIndex::up_to(n, max_weight) {
            let hh = 2 * h.weight() as i32;
            let hi = h.weighted(&degrees);
            for (a, g) in f.generators().iter().enumerate() {
                if !window.contains(g.hdeg + hh, g.ideg + hi) {
                    continue;
                }
                index.insert((h.clone(), a), gens.len());
                let label = if h.is_zero() { g.label.clone() } else { format!("y{}*{}", h, g.label) };
                gens.push(Generator { hdeg: g.hdeg + hh, ideg: g.ideg + hi, label });
                labels.push((h.clone(), a));
            }
        }
        let field = ring.field().clone();
        let one = Poly::one(&field);
        let mut diff = Vec::with_capacity(gens.len());
        for (h, a) in &labels {
            let base = f.generator_differential(*a);
            let mut d = ModElem::zero();
            for (b, w, p) in base.terms() {
                let idx = index[&(h.clone(), b)];
                d.add_term(&field, idx, w, ring.reduce(p));
            }
            if perturbed {
                for (i, &k) in seq.iter().enumerate() {
                    if let Some(hi) = h.lower(i) {
                        d.add_term(&field, index[&(hi, *a)], 1 << k, one.clone());
                    }
                }
            }
            diff.push(d);
        }
        let module = SemifreeDGModule::new(algebra, gens, diff, window)?;
        let chis = (0..n)
            .map(|i| {
                module.hom_from_fn(-2, -degrees[i], |c| {
                    let (h, a) = &labels[c];
                    match h.lower(i) {
                        Some(hi) => ModElem::basis(index[&(hi, *a)], 0, one.clone()),
                        None => ModElem::zero(),
                    }
                })
            })
            .collect();
        Ok(Self { module, labels, index, seq: seq.to_vec(), degrees, chis })
    }

    /// Transport a map on `F` (over `Q`) to `1 ⊗ φ` here: `y^(G) ⊗ e_a ↦
    /// y^(G) ⊗ φ(e_a)`, reduced into the coefficient ring.
    pub fn transport(&self, phi: &DGHom<F::Elem>) -> DGHom<F::Elem> {
        let ring = self.module.ring().clone();
        let field = ring.field().clone();
        let mut out = self.module.hom_empty(phi.hshift, phi.ishift);
        for (c, (g, a)) in self.labels.iter().enumerate() {
            let gen = &self.module.generators()[c];
            if !self.module.window().contains(gen.hdeg + phi.hshift, gen.ideg + phi.ishift) {
                continue;
            }
            let Some(img) = phi.image(*a) else { continue };
            let mut x = ModElem::zero();
            let mut ok = true;
            for (b, w, p) in img.terms() {
                match self.index.get(&(g.clone(), b)) {
                    Some(&idx) => x.add_term(&field, idx, w, ring.reduce(p)),
                    None => ok = false,
                }
            }
            if ok {
                out.set_image(c, x);
            }
        }
        out
    }
}

/// `U_E(F)`: the complex `(Γ_trunc ⊗ F, 1⊗∂ + Σ χ_i ⊗ λ_i)` over `Q/(f)`.
#[derive(Clone, Debug)]
pub struct UniversalResolution<F: Field> {
    pub ring: Arc<Ring<F>>,
    pub tensor: DividedPowerTensor<F>,
}

impl<F: Field> UniversalResolution<F> {
    pub fn module(&self) -> &SemifreeDGModule<F> {
        &self.tensor.module
    }

    pub fn chis(&self) -> &[DGHom<F::Elem>] {
        &self.tensor.chis
    }
}

/// Build `U_E(F)` for `F` semifree over an algebra containing the Koszul
/// generators `seq` (whose boundaries form `f`).
pub fn universal_resolution<F: Field>(f: &SemifreeDGModule<F>, seq: &[usize]) -> Result<UniversalResolution<F>> {
    let alg = f.algebra();
    let q = alg.ring().clone();
    let fs: Vec<Poly<F::Elem>> = seq.iter().map(|&k| alg.boundary(k).clone()).collect();
    let e = Arc::new(KoszulAlgebra::koszul(q.clone(), "xi", &fs)?);
    if let Some((hdeg, ideg)) = koszul_homology_witness(&e, f.window().max_ideg) {
        return Err(Error::NotKoszulRegular { hdeg, ideg });
    }
    let ring = Arc::new(q.quotient_by(&fs, f.window().max_ideg)?);
    let tensor = DividedPowerTensor::new(f, ring.clone(), seq, true)?;
    Ok(UniversalResolution { ring, tensor })
}

/// Hilbert function of `M` on `[lo, hi]`, for acyclicity checks.
pub fn module_dims<F: Field>(m: &PresentedModule<F>, lo: i32, hi: i32) -> BTreeMap<i32, usize> {
    (lo..=hi).map(|j| (j, m.dim(j))).filter(|(_, d)| *d > 0).collect()
}

/// Expected homology of a resolution of `m`: `M` in degree 0, nothing else.
pub fn check_acyclic<F: Field>(x: &SemifreeDGModule<F>, m: &PresentedModule<F>, w: ResolutionWindow) -> Result<bool> {
    let h = x.homology_dims(w.max_hdeg, w.max_ideg)?;
    let lo = x.generators().iter().map(|g| g.ideg).min().unwrap_or(0);
    let mut expected = BTreeMap::new();
    for (j, d) in module_dims(m, lo, w.max_ideg) {
        expected.insert((0, j), d);
    }
    Ok(h == expected)
}
