//! Dispatch from experiment names to the library.

use num_bigint::BigInt;
use serde_json::{json, Value};

use frob_core::charsums::{self, CharSumConfig, Exclusion, MatrixFunctionJson};
use frob_core::dynamics;
use frob_core::exactlin::{rat_to_string, RatPoly};
use frob_core::ff::make_field_of_order;
use frob_core::hecke::{self, HeckeParams, VerifyOptions};
use frob_core::lattice::{self, BoltzmannData, BoltzmannJson, SublatticeD};
use frob_core::report::{overall, Check, Status};
use frob_core::spans::{self, ConstructibleSet, Correspondence, CorrespondenceJson, MPoly};
use frob_core::zeta::{self, Conj4Config};

use crate::params::{Invocation, Params, UsageError};

/// Library errors and bad parameters, kept apart for the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(UsageError),
    Core(frob_core::Error),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

impl From<frob_core::Error> for Failure {
    fn from(e: frob_core::Error) -> Self {
        Failure::Core(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
    /// named CSV tables for --csv
    pub tables: Vec<(String, String)>,
    /// status forced regardless of checks
    pub status: Option<Status>,
}

impl Outcome {
    fn new(checks: Vec<Check>, results: Value) -> Self {
        Outcome { checks, results, tables: Vec::new(), status: None }
    }

    fn report_only(mut self) -> Self {
        self.status = Some(Status::ReportOnly);
        self
    }

    fn table(mut self, name: &str, csv: String) -> Self {
        self.tables.push((name.into(), csv));
        self
    }

    pub fn final_status(&self) -> Status {
        self.status.unwrap_or_else(|| overall(&self.checks))
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Params, key: &str) -> Res<T> {
    let path = p.raw(key);
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError::BadValue { key: key.into(), msg: format!("cannot read {path}: {e}") })?;
    Ok(serde_json::from_str(&text).map_err(|e| UsageError::BadValue { key: key.into(), msg: format!("{path}: {e}") })?)
}

pub fn run(inv: &Invocation) -> Res<Outcome> {
    let p = &inv.params;
    let seed = inv.seed;
    match inv.experiment.name {
        "hecke-verify" => hecke_verify(p),
        "hecke-operator" => {
            let params = HeckeParams::from_order(p.uint("q")?, p.u32("t")?, p.u32("n")?)?;
            let m = hecke::hecke_operator(&params, p.u32("x")?)?;
            let csv = m.to_csv();
            Ok(Outcome::new(vec![], json!({"params": params.to_json(), "matrix": m})).report_only().table("operator", csv))
        }
        "hecke-trace" => {
            let params = HeckeParams::from_order(p.uint("q")?, p.u32("t")?, p.u32("n")?)?;
            let r = hecke::trace_identities(&params, seed)?;
            Ok(Outcome::new(r.checks.clone(), to_value(&r)))
        }
        "hecke-ttan" => {
            let params = HeckeParams::from_order(p.uint("q")?, p.u32("t")?, 1)?;
            let fam = hecke::hecke_family(&params)?;
            let checks = hecke::check_t_tan(&fam, p.float("tol")?)?;
            let m = hecke::t_tan_scaled(&fam);
            let csv = m.to_csv();
            Ok(Outcome::new(checks, json!({"params": params.to_json(), "t_tan_times_q": m})).table("t_tan_times_q", csv))
        }
        "zeta-conj4" => {
            let points = p.ulist("points")?.into_iter().map(|v| v as u32).collect();
            let cfg = Conj4Config { q: p.uint("q")?, t: p.u32("t")?, points, n_max: p.u32("n_max")? };
            let r = zeta::conjecture4_experiment(&cfg, seed)?;
            let csv = r.levels.iter().map(|l| format!("{},{},{},{}\n", l.n, l.trace, l.corr, l.value)).collect();
            Ok(Outcome::new(r.checks.clone(), to_value(&r)).report_only().table("sequence", csv))
        }
        "zeta-product" => {
            let r = zeta::product_formula_check(p.uint("q")?, p.uint("order")? as usize)?;
            let c = Check::from_outcome("product-identity", r.equal, r.first_mismatch.as_ref().map(|m| json!(m)));
            Ok(Outcome::new(vec![c], to_value(&r)))
        }
        "dyn-cheb" => {
            let r = dynamics::cheb_fixed_points(p.uint("q")?, p.u32("n")?)?;
            let c = Check::from_outcome(
                "exact-vs-numeric",
                r.agree,
                Some(json!({"count": r.count, "numeric": r.numeric_count, "deviation": r.numeric_max_deviation})),
            );
            Ok(Outcome::new(vec![c], to_value(&r)))
        }
        "dyn-cheb-sweep" => {
            let checks = vec![dynamics::semigroup_table_check(p.u32("a_max")?), dynamics::cheb_sweep_check(p.uint("limit")?)?];
            Ok(Outcome::new(checks, json!({"limit": p.uint("limit")?, "a_max": p.uint("a_max")?})))
        }
        "dyn-torus" => {
            let poly = RatPoly::from_i64(&p.list("poly")?);
            let r = dynamics::torus_report(&poly, p.u32("n_max")?)?;
            let csv = r
                .levels
                .iter()
                .map(|l| format!("{},{}\n", l.n, l.count.clone().unwrap_or_else(|| "degenerate".into())))
                .collect();
            Ok(Outcome::new(r.checks.clone(), to_value(&r)).table("counts", csv))
        }
        "dyn-elliptic" => {
            let qs = p.list("qs")?;
            Ok(Outcome::new(vec![dynamics::elliptic_block_check(&qs)?], json!({"qs": qs})))
        }
        "span-zm" => span_zm(p),
        "span-ray" => {
            let c = span_source(p)?;
            let g = |k: &str| -> Res<(i64, i64)> {
                match p.list(k)?.as_slice() {
                    [a, b] => Ok((*a, *b)),
                    _ => Err(UsageError::BadValue { key: k.into(), msg: "expected two integers a,b".into() }.into()),
                }
            };
            let r = spans::ray_rationality(&c, g("g1")?, g("g2")?, p.u32("n_max")?)?;
            Ok(Outcome::new(r.checks.clone(), to_value(&r)))
        }
        "span-radon" => {
            let r = spans::radon_check(p.uint("q")?)?;
            Ok(Outcome::new(r.checks.clone(), to_value(&r)))
        }
        "span-prop1" => span_prop1(p, seed),
        "span-algebra" => span_algebra(p, seed),
        "span-suite" => {
            let r = spans::span_suite(p.uint("q")?, seed, p.uint("trials")? as usize, p.u32("n_max")?, p.u32("m_max")?)?;
            Ok(Outcome::new(r.checks.clone(), to_value(&r)))
        }
        "lattice-transfer-check" => {
            let dims: Vec<usize> = p.ulist("dims")?.into_iter().map(|v| v as usize).collect();
            let size = p.uint("size_max")? as usize;
            let r = lattice::transfer_check(&dims, seed, size, lattice::line_length_for(&dims, size))?;
            Ok(Outcome::new(r.checks.clone(), to_value(&r)))
        }
        "lattice-partition" => lattice_partition(p, seed),
        "lattice-reduce" => {
            let b = model(p, seed)?;
            let n = p.uint("n")? as usize;
            let d = b.d();
            let lats = p
                .ulist("sizes")?
                .into_iter()
                .map(|s| SublatticeD::diagonal(&vec![s as i64; d - 1]))
                .collect::<frob_core::Result<Vec<_>>>()?;
            let cases = lattice::dimensional_reduction_check(&b, n, &lats)?;
            let red = lattice::dimensional_reduction(&b, n)?;
            let ok = cases.iter().all(|c| c.equal);
            let c = Check::from_outcome("reduction-identity", ok, Some(json!(cases.iter().filter(|c| !c.equal).collect::<Vec<_>>())));
            Ok(Outcome::new(vec![c], json!({"cases": cases, "reduced": red.to_json()})))
        }
        "lattice-super" => {
            let b = BoltzmannData::from_json(&read_json::<BoltzmannJson>(p, "model")?)?;
            let (t, s) = lattice::supertrace_transfer(&b, p.uint("n")? as usize, p.uint("m_max")? as usize)?;
            Ok(Outcome::new(
                vec![],
                json!({"matrix": t.to_strings(), "supertraces": s.iter().map(rat_to_string).collect::<Vec<_>>()}),
            )
            .report_only())
        }
        "charsum-xn" => {
            let mut cfg = CharSumConfig::new(p.uint("q")?, p.u32("n")?, p.u32("x")?);
            cfg.exclusion = exclusion(p)?;
            cfg.generator_rank = p.uint("generator_rank")? as usize;
            let r = charsums::x_n_set(&cfg)?;
            let expect = (cfg.q as usize).pow(cfg.n) - 2;
            let checks = vec![
                Check::from_outcome("xn-size", r.values.len() == expect, Some(json!({"size": r.values.len()}))),
                Check::from_outcome("xn-real", r.max_imag <= 1e-9, Some(json!({"max_imag": r.max_imag}))),
                Check::from_outcome("xn-weil-bound", r.max_abs <= r.bound + 1e-9, Some(json!({"max_abs": r.max_abs, "bound": r.bound}))),
            ];
            let sorted = charsums::sorted_multiset(&r.values);
            let csv = sorted.iter().map(|z| format!("{},{}\n", z.re, z.im)).collect();
            let mut res = to_value(&r);
            res["values"] = json!(sorted.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
            Ok(Outcome::new(checks, res).table("xn", csv))
        }
        "charsum-xn-check" => {
            let r = charsums::x_n_check(p.uint("q")?, p.u32("n")?, exclusion(p)?, 1e-9)?;
            Ok(Outcome::new(r.checks.clone(), to_value(&r)))
        }
        "charsum-xprime" => {
            let (q, n) = (p.uint("q")?, p.u32("n")?);
            let f = read_json::<MatrixFunctionJson>(p, "matrix_file")?.build()?;
            let r = charsums::xprime_n_set(&f, q, n)?;
            let sorted = charsums::sorted_multiset(&r.values);
            let mut checks = vec![];
            let mut res = json!({"q": q, "n": n, "values": sorted.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()});
            if p.is_set("compare_x") {
                let xn = charsums::x_n_set(&CharSumConfig::new(q, n, p.u32("compare_x")?))?;
                let cmp = charsums::compare_multisets(&xn.values, &r.values, p.float("tol")?)?;
                checks.push(Check::report("xn-vs-xprime", to_value(&cmp)).with_detail(if cmp.pass { "multisets coincide" } else { "multisets differ" }));
                res["comparison"] = to_value(&cmp);
            }
            let csv = sorted.iter().map(|z| format!("{},{}\n", z.re, z.im)).collect();
            Ok(Outcome::new(checks, res).report_only().table("xprime", csv))
        }
        other => Err(UsageError::UnknownExperiment(other.into()).into()),
    }
}

fn hecke_verify(p: &Params) -> Res<Outcome> {
    let params = HeckeParams::from_order(p.uint("q")?, p.u32("t")?, 1)?;
    let fam = hecke::hecke_family(&params)?;
    let opts = VerifyOptions {
        lift_levels: p.ulist("lift")?.into_iter().map(|v| v as u32).collect(),
        real_tol: p.float("real_tol")?,
        lift_tol: p.float("lift_tol")?,
        ..VerifyOptions::default()
    };
    let r = hecke::verify_properties(&fam, &opts)?;
    Ok(Outcome::new(r.checks.clone(), to_value(&r)))
}

fn span_source(p: &Params) -> Res<Correspondence> {
    let builtin = p.raw("builtin");
    if builtin == "file" {
        return Ok(read_json::<CorrespondenceJson>(p, "file")?.build()?);
    }
    let f = make_field_of_order(p.uint("q")?)?;
    let a1 = ConstructibleSet::affine(&f, 1);
    match builtin {
        "frobenius" => Ok(spans::frobenius_graph(&a1)),
        "identity" => Ok(spans::identity(&a1)),
        "square" => {
            let x = MPoly::var(&f, 0, 1);
            Ok(spans::graph(&a1, &a1, vec![x.mul(&f, &x)])?)
        }
        other => Err(UsageError::BadValue { key: "builtin".into(), msg: format!("unknown correspondence '{other}'") }.into()),
    }
}

fn span_zm(p: &Params) -> Res<Outcome> {
    let c = span_source(p)?;
    let (n_max, m_max) = (p.u32("n_max")?, p.u32("m_max")?);
    let t = spans::z_table(&c, n_max, m_max)?;
    let mut bad = Vec::new();
    for n in 1..=n_max {
        for m in 1..=m_max {
            let o = spans::z_fibered_oracle(&c, n, m)?;
            if &o != t.get(n, m) {
                bad.push(json!({"n": n, "m": m, "table": t.get(n, m).to_string(), "oracle": o.to_string()}));
            }
        }
    }
    let bound = if p.is_set("column_order_bound") { Some(p.uint("column_order_bound")? as usize) } else { None };
    let obs = spans::observation_check(&c, n_max, m_max, bound)?;
    let mut checks = vec![Check::from_outcome("z-table-equals-fibered-oracle", bad.is_empty(), Some(json!(bad)))];
    checks.extend(obs.checks.iter().cloned());
    let csv = t
        .values
        .iter()
        .map(|r| r.iter().map(BigInt::to_string).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    Ok(Outcome::new(checks, json!({"table": t, "observations": obs})).table("z_table", csv))
}

fn span_prop1(p: &Params, seed: u64) -> Res<Outcome> {
    let q = p.uint("q")?;
    let reports = if p.is_set("t") {
        let x = p.ulist("x")?;
        let x: [u32; 4] = match x.as_slice() {
            [a, b, c, d] => [*a as u32, *b as u32, *c as u32, *d as u32],
            _ => return Err(UsageError::BadValue { key: "x".into(), msg: "expected four indices".into() }.into()),
        };
        vec![spans::prop1_curve_counts(q, p.u32("t")?, x)?]
    } else {
        spans::prop1_random_tuples(q, p.uint("count")? as usize, seed)?
    };
    let bad: Vec<_> = reports.iter().filter(|r| r.equal == Some(false)).collect();
    let degenerate = reports.iter().filter(|r| r.degenerate.is_some()).count();
    let c = Check::from_outcome("counts-equal", bad.is_empty(), Some(json!(bad)))
        .with_detail(format!("{} tuples, {degenerate} degenerate (not asserted)", reports.len()));
    Ok(Outcome::new(vec![c], json!({"tuples": reports})))
}

fn span_algebra(p: &Params, seed: u64) -> Res<Outcome> {
    let q = p.uint("q")?;
    let (tensor, unit) = match p.raw("kind") {
        "hecke" => {
            let fam = hecke::hecke_family(&HeckeParams::from_order(q, p.u32("t")?, 1)?)?;
            let s = spans::hecke_structure_tensor(&fam);
            let unit = vec![1; s.size];
            (s, unit)
        }
        "additive" => spans::additive_group_algebra(q)?,
        "multiplicative" => spans::multiplicative_group_algebra(q)?,
        other => return Err(UsageError::BadValue { key: "kind".into(), msg: format!("unknown algebra '{other}'") }.into()),
    };
    let r = spans::algebra_axiom_check(&tensor, &unit, seed)?;
    Ok(Outcome::new(r.checks.clone(), to_value(&r)))
}

fn model(p: &Params, seed: u64) -> Res<BoltzmannData> {
    if p.is_set("model") {
        Ok(BoltzmannData::from_json(&read_json::<BoltzmannJson>(p, "model")?)?)
    } else {
        let dims: Vec<usize> = p.ulist("dims")?.into_iter().map(|v| v as usize).collect();
        Ok(BoltzmannData::random(&dims, seed)?)
    }
}

fn lattice_partition(p: &Params, seed: u64) -> Res<Outcome> {
    let b = model(p, seed)?;
    let l = p.list("lattice")?;
    let lat = if b.d() == 2 && l.len() == 3 {
        SublatticeD::nmk(l[0], l[1], l[2])?
    } else if l.len() == b.d() {
        SublatticeD::diagonal(&l)?
    } else {
        return Err(UsageError::BadValue { key: "lattice".into(), msg: format!("expected n,m,k or {} sizes", b.d()) }.into());
    };
    let z = lattice::partition_lattice(&b, &lat)?;
    let mut res = json!({"lattice": lat, "graph": rat_to_string(&z)});
    let mut checks = Vec::new();
    if b.d() == 2 && !b.is_super() && lat.basis[1][0] == 0 {
        // column form [[n, k], [0, m]]
        let (n, k, m) = (lat.basis[0][0] as usize, lat.basis[0][1] as u32, lat.basis[1][1] as u32);
        let s = lattice::partition_sheared(&b, n, m, k)?;
        res["transfer"] = json!(rat_to_string(&s));
        checks.push(Check::from_outcome("graph-vs-transfer", s == z, None));
    }
    Ok(Outcome::new(checks, res))
}

fn exclusion(p: &Params) -> Res<Exclusion> {
    match p.raw("exclusion") {
        "literal" => Ok(Exclusion::Literal),
        "include-x" | "include_x" => Ok(Exclusion::IncludeX),
        other => Err(UsageError::BadValue { key: "exclusion".into(), msg: format!("'{other}' is not literal or include-x") }.into()),
    }
}
