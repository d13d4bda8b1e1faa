//! Experiment registry: names, topics and parameter schemas.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Int,
    IntList,
    Float,
    Text,
    Path,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: Kind,
    /// None means required
    #[serde(skip_serializing_if = "Option::is_none")]
    pub default: Option<&'static str>,
    pub help: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Experiment {
    pub name: &'static str,
    pub topic: &'static str,
    /// "assertable" or "report-only"
    pub class: &'static str,
    pub params: Vec<ParamSpec>,
}

const fn req(name: &'static str, kind: Kind, help: &'static str) -> ParamSpec {
    ParamSpec { name, kind, default: None, help }
}

const fn opt(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { name, kind, default: Some(default), help }
}

use Kind::*;

fn span_source() -> Vec<ParamSpec> {
    vec![
        opt("builtin", Text, "frobenius", "frobenius | square | identity | file"),
        opt("file", Path, "", "correspondence JSON when builtin=file"),
        opt("q", Int, "2", "field order for builtin correspondences"),
    ]
}

fn model_source() -> Vec<ParamSpec> {
    vec![
        opt("model", Path, "", "Boltzmann data JSON; a seeded random model when empty"),
        opt("dims", IntList, "2,2", "space dimensions of the random model"),
    ]
}

pub fn catalog() -> Vec<Experiment> {
    let mut v = vec![
        Experiment {
            name: "hecke-verify",
            topic: "Hecke operators: exact properties and spectral bound",
            class: "assertable",
            params: vec![
                req("q", Int, "odd prime power"),
                req("t", Int, "index of t in F_q, outside {0,1}"),
                opt("lift", IntList, "", "extension degrees for the eigenvalue lift check"),
                opt("real_tol", Float, "1e-9", "tolerance for reality and the 2√q bound"),
                opt("lift_tol", Float, "1e-6", "tolerance for the lift check"),
            ],
        },
        Experiment {
            name: "hecke-operator",
            topic: "Hecke operators: a single matrix",
            class: "report-only",
            params: vec![
                req("q", Int, "odd prime power"),
                req("t", Int, "index of t in F_q"),
                req("x", Int, "index of x in F_{q^n}"),
                opt("n", Int, "1", "extension degree"),
            ],
        },
        Experiment {
            name: "hecke-trace",
            topic: "Trace(D) and Trace(T_x D) identities",
            class: "assertable",
            params: vec![req("q", Int, "odd prime power"), req("t", Int, "index of t in F_q"), opt("n", Int, "1", "extension degree")],
        },
        Experiment {
            name: "hecke-ttan",
            topic: "tangent operator T_tan",
            class: "assertable",
            params: vec![req("q", Int, "odd prime power"), req("t", Int, "index of t in F_q"), opt("tol", Float, "1e-9", "spectral tolerance")],
        },
        Experiment {
            name: "zeta-conj4",
            topic: "corrected Ruelle-zeta traces Trace(T_x1…T_xk D) + Corr(n,k)",
            class: "report-only",
            params: vec![
                req("q", Int, "odd prime"),
                req("t", Int, "index of t in F_q"),
                req("points", IntList, "indices x_1..x_k in F_q"),
                opt("n_max", Int, "3", "largest extension degree"),
            ],
        },
        Experiment {
            name: "zeta-product",
            topic: "exp(−Σ tⁿ/n · qⁿ/(qⁿ−1)²) = ∏(1−q^{−m}t)^m",
            class: "assertable",
            params: vec![req("q", Int, "q ≥ 2"), opt("order", Int, "12", "series order")],
        },
        Experiment {
            name: "dyn-cheb",
            topic: "fixed points of Chebyshev maps",
            class: "assertable",
            params: vec![req("q", Int, "q ≥ 2"), opt("n", Int, "1", "iterate")],
        },
        Experiment {
            name: "dyn-cheb-sweep",
            topic: "Chebyshev semigroup and fixed-point sweep",
            class: "assertable",
            params: vec![opt("limit", Int, "10000", "largest q^n"), opt("a_max", Int, "8", "semigroup table size")],
        },
        Experiment {
            name: "dyn-torus",
            topic: "torus endomorphisms from Weil polynomials",
            class: "assertable",
            params: vec![
                req("poly", IntList, "monic integer coefficients, constant term first"),
                opt("n_max", Int, "6", "largest iterate"),
            ],
        },
        Experiment {
            name: "dyn-elliptic",
            topic: "symplectic blocks for quadratic Weil polynomials",
            class: "assertable",
            params: vec![opt("qs", IntList, "2,3,4,5,7,9,11", "values of q")],
        },
    ];
    let mut zm = span_source();
    zm.push(opt("n_max", Int, "3", "largest extension degree"));
    zm.push(opt("m_max", Int, "4", "largest power"));
    zm.push(opt("column_order_bound", Int, "", "known bound on column recurrence orders; columns are only reported without it"));
    let mut ray = span_source();
    ray.push(opt("g1", IntList, "1,0", "first generator (a,b)"));
    ray.push(opt("g2", IntList, "0,1", "second generator (a,b), scaled by j = 1..n_max"));
    ray.push(opt("n_max", Int, "6", "number of lattices along the ray"));
    v.extend([
        Experiment { name: "span-zm", topic: "Z_M(n,m) tables of correspondences", class: "assertable", params: zm },
        Experiment { name: "span-ray", topic: "Z_M along rays of sublattices", class: "assertable", params: ray },
        Experiment {
            name: "span-radon",
            topic: "Radon transform on P²(F_q)",
            class: "assertable",
            params: vec![req("q", Int, "prime power")],
        },
        Experiment {
            name: "span-prop1",
            topic: "point-count equality of the two elliptic curves",
            class: "assertable",
            params: vec![
                req("q", Int, "odd prime power"),
                opt("t", Int, "", "index of t; random tuples when empty"),
                opt("x", IntList, "", "four indices x_1..x_4"),
                opt("count", Int, "10", "number of random tuples"),
            ],
        },
        Experiment {
            name: "span-algebra",
            topic: "algebra axioms in the span category",
            class: "assertable",
            params: vec![
                opt("kind", Text, "hecke", "hecke | additive | multiplicative"),
                req("q", Int, "field order"),
                opt("t", Int, "2", "index of t (hecke only)"),
            ],
        },
        Experiment {
            name: "span-suite",
            topic: "functoriality, scissor relations and fibered powers on random spans",
            class: "assertable",
            params: vec![
                req("q", Int, "field order"),
                opt("trials", Int, "5", "random spans"),
                opt("n_max", Int, "3", "largest extension degree"),
                opt("m_max", Int, "3", "largest power"),
            ],
        },
    ]);
    let mut part = model_source();
    part.push(opt("lattice", IntList, "2,2,0", "n,m,k for Λ_{n,m,k} (d = 2) or diagonal n_1..n_d"));
    let mut red = model_source();
    red.push(opt("n", Int, "2", "period along the last axis"));
    red.push(opt("sizes", IntList, "1,2,3", "diagonal sizes checked after reduction"));
    let mut sup = vec![req("model", Path, "super Boltzmann data JSON (d = 2)")];
    sup.push(opt("n", Int, "2", "width"));
    sup.push(opt("m_max", Int, "4", "largest power"));
    v.extend([
        Experiment {
            name: "lattice-transfer-check",
            topic: "transfer matrices against graph contraction",
            class: "assertable",
            params: vec![opt("dims", IntList, "2,2", "dims of V_1, V_2"), opt("size_max", Int, "3", "largest n, m")],
        },
        Experiment { name: "lattice-partition", topic: "partition function on a sublattice", class: "assertable", params: part },
        Experiment { name: "lattice-reduce", topic: "dimensional reduction", class: "assertable", params: red },
        Experiment { name: "lattice-super", topic: "super transfer matrices", class: "report-only", params: sup },
        Experiment {
            name: "charsum-xn",
            topic: "character-sum multiset X_n",
            class: "assertable",
            params: vec![
                req("q", Int, "odd prime power"),
                opt("n", Int, "1", "extension degree"),
                req("x", Int, "index of x in F_q, outside {0,1}"),
                opt("exclusion", Text, "literal", "literal (drop y ∈ {0,1,x}) | include-x (drop y ∈ {0,1})"),
                opt("generator_rank", Int, "0", "0 = smallest generator"),
            ],
        },
        Experiment {
            name: "charsum-xn-check",
            topic: "X_n size, reality, bound and generator independence for every x",
            class: "assertable",
            params: vec![
                req("q", Int, "odd prime power"),
                opt("n", Int, "1", "extension degree"),
                opt("exclusion", Text, "literal", "literal | include-x"),
            ],
        },
        Experiment {
            name: "charsum-xprime",
            topic: "Frobenius-twisted matrix products X'_n",
            class: "report-only",
            params: vec![
                req("q", Int, "q ≥ 2"),
                opt("n", Int, "1", "extension degree"),
                req("matrix_file", Path, "2×2 rational matrix function JSON"),
                opt("compare_x", Int, "", "compare against X_n for this x"),
                opt("tol", Float, "1e-9", "comparison tolerance"),
            ],
        },
    ]);
    v
}

pub fn find(name: &str) -> Option<Experiment> {
    catalog().into_iter().find(|e| e.name == name)
}

/// First words of two-word command forms such as `dyn cheb`.
pub const GROUPS: &[&str] = &["hecke", "zeta", "dyn", "span", "lattice", "charsum"];
