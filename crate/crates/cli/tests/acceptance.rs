//! One line per acceptance criterion; the test fails if any criterion does.

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use relci::scenario::ScenarioFile;
use relci_core::exactlin::Matrix;
use relci_core::graded::{kernel_gens_up_to, GradedMatrix, PolyRing, Ring};
use relci_core::homalg::perturbation_pipeline;
use relci_core::perturb::perturb;
use relci_core::resolve::{check_acyclic, semifree_resolution, universal_resolution, Scenario, Sequence};
use relci_core::{Error, Field, PrimeField};
use serde_json::Value;

const P: u32 = 32003;

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn relci(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_relci")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Run a command with `--json -` and parse the report.
fn report(args: &[&str]) -> Result<(i32, Value), String> {
    let mut all = args.to_vec();
    all.extend(["--json", "-"]);
    let r = relci(&all);
    let v = serde_json::from_str(&r.stdout).map_err(|e| format!("bad report ({}): {}", e, r.stderr))?;
    Ok((r.code, v))
}

fn coefficients(v: &Value, key: &str) -> Result<Vec<i64>, String> {
    v["series"][key]["coefficients"]
        .as_array()
        .ok_or_else(|| format!("missing series {}", key))?
        .iter()
        .map(|c| c.as_i64().ok_or_else(|| "non-integer coefficient".to_string()))
        .collect()
}

fn totals(v: &Value, key: &str) -> Result<Vec<i64>, String> {
    v["tables"][key]["totals"]
        .as_array()
        .ok_or_else(|| format!("missing table {}", key))?
        .iter()
        .map(|c| c.as_i64().ok_or_else(|| "bad total".to_string()))
        .collect()
}

fn failed_checks(v: &Value) -> Vec<String> {
    v["checks"]
        .as_array()
        .map(|cs| cs.iter().filter(|c| c["passed"] != Value::Bool(true)).map(|c| c["name"].to_string()).collect())
        .unwrap_or_else(|| vec!["no checks".into()])
}

fn load(name: &str, max_hdeg: Option<i32>) -> Scenario<PrimeField> {
    let file = ScenarioFile::load(&scenario_path(name)).unwrap();
    let mut w = file.window;
    if let Some(t) = max_hdeg {
        w.max_hdeg = t;
        w.max_ideg = t + 1;
    }
    file.build(PrimeField::new(P).unwrap(), w).unwrap()
}

/// Ranks of the minimal graded free resolution of `k` over `k[x,y]/(x^2)`,
/// built degreewise: each syzygy module's minimal generators are a basis of
/// the kernel modulo ring multiples of lower-degree generators.
fn nakayama_ranks(len: usize, max_degree: i32) -> Vec<i64> {
    let field = PrimeField::new(P).unwrap();
    let base = PolyRing::new(field.clone(), &["x", "y"]).unwrap();
    let (x, y) = (base.var(0), base.var(1));
    let x2 = x.mul(&field, &x);
    let r = Ring::quotient(base, vec![x2], max_degree + 1).unwrap();
    let mut ranks = vec![1];
    let mut d = GradedMatrix::from_rows(&[1, 1], vec![1, 1], vec![0], vec![vec![x, y]]).unwrap();
    ranks.push(2);
    while ranks.len() < len {
        let gens = kernel_gens_up_to(&r, &d, max_degree);
        ranks.push(gens.len() as i64);
        let source: Vec<i32> = gens.iter().map(|g| g.0).collect();
        let cols = gens.into_iter().map(|(_, c)| c.into_iter().enumerate().collect()).collect();
        d = GradedMatrix::from_columns(&[1, 1], source, d.source().to_vec(), cols).unwrap();
    }
    ranks
}

fn criterion_1() -> Result<String, String> {
    let oracle = nakayama_ranks(9, 10);
    if oracle != vec![1, 2, 2, 2, 2, 2, 2, 2, 2] {
        return Err(format!("oracle produced {:?}", oracle));
    }
    let (code, v) = report(&["series", scenario_path("hypersurface.json").to_str().unwrap(), "--which", "f", "--trunc", "8"])?;
    let p = coefficients(&v, "poincare_f")?;
    if code != 0 || p != oracle {
        return Err(format!("exit {}, series {:?}, oracle {:?}", code, p, oracle));
    }
    Ok(format!("Poincare {:?} matches the Nakayama resolution", p))
}

fn criterion_2() -> Result<String, String> {
    let (code, v) = report(&["verify-t2", scenario_path("hypersurface.json").to_str().unwrap(), "--trunc", "8"])?;
    let (pf, pg) = (coefficients(&v, "poincare_f")?, coefficients(&v, "poincare_f_prime")?);
    let (bf, bg) = (coefficients(&v, "bass_f")?, coefficients(&v, "bass_f_prime")?);
    if code != 0 || !failed_checks(&v).is_empty() {
        return Err(format!("exit {}, failed {:?}", code, failed_checks(&v)));
    }
    if pf != pg || bf != bg || pf.len() != 9 || bf.len() != 9 {
        return Err(format!("series differ: {:?} {:?} {:?} {:?}", pf, pg, bf, bg));
    }
    Ok(format!("{} checks pass; P = B = {:?}", v["checks"].as_array().unwrap().len(), pf))
}

fn criterion_3() -> Result<String, String> {
    let (code, v) = report(&["verify-t9", scenario_path("hypersurface_annihilator.json").to_str().unwrap(), "--trunc", "6"])?;
    if code != 0 || !failed_checks(&v).is_empty() {
        return Err(format!("exit {}, failed {:?}", code, failed_checks(&v)));
    }
    // P(t)(1 - t^2) against (1 + t)^2
    let p = coefficients(&v, "poincare_f")?;
    let product: Vec<i64> = (0..=6).map(|k| p[k] - if k >= 2 { p[k - 2] } else { 0 }).collect();
    if product != vec![1, 2, 1, 0, 0, 0, 0] {
        return Err(format!("P(1-t^2) = {:?}", product));
    }
    let (tr, tq) = (totals(&v, "tor_f")?, totals(&v, "tor_q")?);
    for m in 0..=6usize {
        let conv: i64 = (0..=m / 2).map(|k| tq[m - 2 * k]).sum();
        if tr[m] != conv {
            return Err(format!("dim Tor^R_{} = {} but the convolution gives {}", m, tr[m], conv));
        }
    }
    Ok(format!("P(1-t^2) = {:?}; Tor totals {:?} from {:?}", product, tr, tq))
}

fn criterion_4() -> Result<String, String> {
    let (code, v) = report(&["verify-t2", scenario_path("two_sequence.json").to_str().unwrap(), "--trunc", "6"])?;
    if code != 0 || !failed_checks(&v).is_empty() {
        return Err(format!("verify-t2 exit {}, failed {:?}", code, failed_checks(&v)));
    }
    let (pf, pg) = (coefficients(&v, "poincare_f")?, coefficients(&v, "poincare_f_prime")?);
    let (bf, bg) = (coefficients(&v, "bass_f")?, coefficients(&v, "bass_f_prime")?);
    if pf != pg || bf != bg || pf.len() != 7 {
        return Err("series differ".into());
    }
    let (code, w) = report(&["verify-t9", scenario_path("two_sequence_annihilator.json").to_str().unwrap(), "--trunc", "6"])?;
    if code != 0 || !failed_checks(&w).is_empty() {
        return Err(format!("verify-t9 exit {}, failed {:?}", code, failed_checks(&w)));
    }
    // n = 2: dim Tor^R_m = sum_k C(k+1, k) dim Tor^Q_(m-2k)
    let (tr, tq) = (totals(&w, "tor_f")?, totals(&w, "tor_q")?);
    for m in 0..=6usize {
        let conv: i64 = (0..=m / 2).map(|k| (k as i64 + 1) * tq[m - 2 * k]).sum();
        if tr[m] != conv {
            return Err(format!("dim Tor^R_{} = {} but the convolution gives {}", m, tr[m], conv));
        }
    }
    Ok(format!("P = {:?}; convolution {:?} from {:?}", pf, tr, tq))
}

fn criterion_5() -> Result<String, String> {
    let scenarios = [
        ("hypersurface.json", 8),
        ("hypersurface_annihilator.json", 8),
        ("two_sequence.json", 8),
        ("two_sequence_annihilator.json", 8),
    ];
    let mut count = 0;
    for (name, t) in scenarios {
        let s = load(name, Some(t));
        let pipe = perturbation_pipeline(&s).map_err(|e| format!("{}: {}", name, e))?;
        if !pipe.homotopies_on_f.indices().any(|h| h.weight() == 4) {
            return Err(format!("{}: no |H| = 4 homotopies", name));
        }
        for c in pipe.structural_checks() {
            if !c.passed {
                return Err(format!("{}: {} ({})", name, c.name, c.detail));
            }
            count += 1;
        }
    }
    Ok(format!("{} checks over {} scenarios, |H| <= 4", count, scenarios.len()))
}

fn criterion_6() -> Result<String, String> {
    let mut done = 0;
    for name in ["hypersurface.json", "hypersurface_annihilator.json", "two_sequence.json", "two_sequence_annihilator.json"] {
        let s = load(name, Some(6));
        for which in [Sequence::F, Sequence::FPrime] {
            if s.sequence(which).iter().all(|p| p.is_zero()) {
                continue;
            }
            let e = s.koszul(which).map_err(|e| e.to_string())?;
            let res = semifree_resolution(e, s.m_over_q(), s.window()).map_err(|e| e.to_string())?;
            let seq: Vec<usize> = (0..s.n_seq()).collect();
            let u = universal_resolution(&res.module, &seq).map_err(|e| e.to_string())?;
            if !check_acyclic(u.module(), s.m_over_q(), s.window()).map_err(|e| e.to_string())? {
                return Err(format!("{} {:?}: not acyclic", name, which));
            }
            let x = u.module();
            for a in u.chis() {
                for b in u.chis() {
                    if x.hom_difference_witness(&x.compose(a, b), &x.compose(b, a)).is_some() {
                        return Err(format!("{} {:?}: chi operators do not commute", name, which));
                    }
                }
            }
            done += 1;
        }
    }
    Ok(format!("{} universal resolutions acyclic with commuting chi", done))
}

fn parse_matrix(field: &PrimeField, rows: &Value) -> Matrix<u32> {
    let rows = rows.as_array().unwrap();
    let ncols = rows.first().map(|r| r.as_array().unwrap().len()).unwrap_or(0);
    let mut m = Matrix::zeros(field, rows.len(), ncols);
    for (i, r) in rows.iter().enumerate() {
        for (j, e) in r.as_array().unwrap().iter().enumerate() {
            m[(i, j)] = field.from_i64(e.as_str().unwrap().parse().unwrap());
        }
    }
    m
}

/// Re-check `Psi_target A_i = A'_i Psi_source` from the matrices in a
/// verbose report.
fn equivariance_from_report(v: &Value, tag: &str, degrees: &[i32]) -> Result<usize, String> {
    let field = PrimeField::new(P).unwrap();
    let isos: Vec<&Value> = v["isomorphisms"][tag].as_array().ok_or("no isomorphisms")?.iter().collect();
    let psi = |at: [i64; 2]| isos.iter().find(|m| m["source"] == serde_json::json!(at)).map(|m| parse_matrix(&field, &m["rows"]));
    let (src, dst) = if tag == "tor" { ("tor_f", "tor_f_prime") } else { ("ext_f_prime", "ext_f") };
    let chi = |key: &str| -> Vec<(usize, [i64; 2], Matrix<u32>)> {
        v["operators"][key]["chi"]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| {
                let s = m["source"].as_array().unwrap();
                (m["index"].as_u64().unwrap() as usize, [s[0].as_i64().unwrap(), s[1].as_i64().unwrap()], parse_matrix(&field, &m["rows"]))
            })
            .collect()
    };
    let (a, b) = (chi(src), chi(dst));
    let mut checked = 0;
    for (i, at, ma) in &a {
        let Some((_, _, mb)) = b.iter().find(|(k, bt, _)| k == i && bt == at) else {
            return Err(format!("no matching chi_{} at {:?}", i, at));
        };
        let d = degrees[i - 1] as i64;
        let target = if tag == "tor" { [at[0] - 2, at[1] - d] } else { [at[0] + 2, at[1] - d] };
        let lhs = psi(target).map(|p| p.mul(&field, ma).unwrap());
        let rhs = psi(*at).map(|p| mb.mul(&field, &p).unwrap());
        let zero = |m: &Option<Matrix<u32>>| m.as_ref().map(|m| (0..m.rows()).all(|r| (0..m.cols()).all(|c| m[(r, c)] == 0))).unwrap_or(true);
        let same = match (&lhs, &rhs) {
            (Some(l), Some(r)) => l == r,
            _ => zero(&lhs) && zero(&rhs),
        };
        if !same {
            return Err(format!("{} chi_{} at {:?}", tag, i, at));
        }
        checked += 1;
    }
    Ok(checked)
}

fn criterion_7() -> Result<String, String> {
    let mut total = 0;
    for (name, degrees) in [("hypersurface.json", vec![2]), ("two_sequence.json", vec![2, 2])] {
        let (code, v) = report(&["verify-t2", scenario_path(name).to_str().unwrap(), "--max-hdeg", "6", "--max-ideg", "7", "--verbose-operators"])?;
        if code != 0 {
            return Err(format!("{}: exit {}", name, code));
        }
        for tag in ["tor", "ext"] {
            total += equivariance_from_report(&v, tag, &degrees).map_err(|e| format!("{}: {}", name, e))?;
        }
    }
    Ok(format!("{} conjugation identities re-checked from reported matrices", total))
}

fn criterion_8() -> Result<String, String> {
    use relci_core::homalg::verify_t2;
    let s = load("two_sequence.json", Some(6));
    let swapped = s.permuted(&[1, 0]).map_err(|e| e.to_string())?;
    let a = verify_t2(&s).map_err(|e| e.to_string())?;
    let b = verify_t2(&swapped).map_err(|e| e.to_string())?;
    if a.tables != b.tables || !a.passed() || !b.passed() {
        return Err("tables differ after permuting witnesses".into());
    }
    // the hypersurface witness split in two, in both orders
    let file = ScenarioFile::load(&scenario_path("hypersurface.json")).unwrap();
    let mut split = file.clone();
    split.witnesses.clear();
    split.witnesses.insert("1,1".into(), ["x".into(), "-2y".into()]);
    split.witnesses.insert("1,2".into(), ["x".into(), "y".into()]);
    let mut w = file.window;
    w.max_hdeg = 6;
    w.max_ideg = 7;
    let field = PrimeField::new(P).unwrap();
    let s = split.build(field.clone(), w).map_err(|e| e.to_string())?;
    let swapped = s.permuted(&[1, 0]).map_err(|e| e.to_string())?;
    let base = file.build(field, w).map_err(|e| e.to_string())?;
    let (x, y, z) = (verify_t2(&s), verify_t2(&swapped), verify_t2(&base));
    let (x, y, z) = (x.map_err(|e| e.to_string())?, y.map_err(|e| e.to_string())?, z.map_err(|e| e.to_string())?);
    if x.tables != y.tables || x.tables != z.tables {
        return Err("tables depend on the witness presentation".into());
    }
    Ok(format!("{} tables identical across 5 constructions", a.tables.len() + x.tables.len()))
}

fn criterion_9() -> Result<String, String> {
    let r = relci(&["check-regular", scenario_path("not_regular.json").to_str().unwrap()]);
    if r.code != 1 || !r.stdout.contains("H_1(E) is nonzero in internal degree 1") {
        return Err(format!("check-regular: exit {}, {}", r.code, r.stdout));
    }
    let r = relci(&["tor", scenario_path("bad_witness.json").to_str().unwrap()]);
    if r.code != 2 || !r.stderr.contains("annihilator violation") || !r.stderr.contains("g11 = -y") {
        return Err(format!("bad witness: exit {}, {}", r.code, r.stderr));
    }
    // δ(c) = b, δ(b) = a on three free generators with zero differential
    let field = PrimeField::new(P).unwrap();
    let q = Arc::new(Ring::polynomial(PolyRing::new(field.clone(), &["x"]).unwrap(), 4));
    let alg = Arc::new(relci_core::dgcore::KoszulAlgebra::new(q.clone(), vec![]).unwrap());
    let gens = ["a", "b", "c"]
        .iter()
        .enumerate()
        .map(|(h, l)| relci_core::dgcore::Generator { hdeg: h as i32, ideg: 0, label: l.to_string() })
        .collect();
    let zero = vec![relci_core::dgcore::ModElem::zero(); 3];
    let x = relci_core::dgcore::SemifreeDGModule::new(alg, gens, zero, relci_core::dgcore::Window { max_hdeg: 2, max_ideg: 2 }).unwrap();
    let one = relci_core::graded::Poly::one(&field);
    let delta = x.hom_from_fn(-1, 0, |k| {
        if k == 0 {
            relci_core::dgcore::ModElem::zero()
        } else {
            relci_core::dgcore::ModElem::basis(k - 1, 0, one.clone())
        }
    });
    match perturb(&x, &delta) {
        Err(Error::NotSquareZero { witness }) if witness == "c" => {}
        other => return Err(format!("perturb: {:?}", other.map(|_| ()))),
    }
    Ok("check-regular flags (x,x) at H_1; annihilator violation on g11; perturb rejects delta^2 != 0 at c".into())
}

#[test]
fn acceptance_criteria() {
    type Criterion = fn() -> Result<String, String>;
    let criteria: [(u32, &str, Criterion, Duration); 9] = [
        (1, "hypersurface Poincare series", criterion_1, Duration::from_secs(10)),
        (2, "hypersurface pair comparison", criterion_2, Duration::from_secs(60)),
        (3, "annihilator variant, one element", criterion_3, Duration::from_secs(30)),
        (4, "two-sequence comparison", criterion_4, Duration::from_secs(300)),
        (5, "perturbation engine properties", criterion_5, Duration::from_secs(300)),
        (6, "universal resolution acyclicity", criterion_6, Duration::from_secs(300)),
        (7, "equivariance of the comparison", criterion_7, Duration::from_secs(300)),
        (8, "invariance of choice", criterion_8, Duration::from_secs(300)),
        (9, "negative controls", criterion_9, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (n, title, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{} but took {:.1?} (limit {:?})", d, took, limit)),
            Err(e) => (false, e),
        };
        if !ok {
            failures += 1;
        }
        println!("criterion {} {}: {} in {:.2?}: {}", n, if ok { "PASS" } else { "FAIL" }, title, took, detail);
    }
    assert_eq!(failures, 0, "{} acceptance criteria failed", failures);
}
