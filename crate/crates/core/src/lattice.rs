//! Translation-invariant lattice models: partition functions on colored
//! graphs, transfer matrices, sheared lattices and dimensional reduction.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{check_budget, Error, Result};
use crate::exactlin::{parse_rat, rat_to_string, table_recurrences_rat, RatMatrix, TableRecurrences};
use crate::report::Check;

/// Largest transfer / reduced operator dimension.
pub const OPERATOR_BUDGET: u128 = 4096;
/// Largest number of partial states kept during a graph contraction.
pub const CONTRACTION_BUDGET: u128 = 2_000_000;
/// Largest lattice index turned into a graph.
pub const INDEX_BUDGET: u128 = 4096;

/// Spaces V_1..V_d (each split even|odd) and R on V_1 ⊗ … ⊗ V_d. Multi-indices
/// are row-major with V_1 most significant; R is stored as R[out][in].
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannData {
    pub parity_dims: Vec<(usize, usize)>,
    pub r: RatMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoltzmannJson {
    pub d: usize,
    pub dims: Vec<[usize; 2]>,
    pub entries: Vec<String>,
}

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn decode(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
    out
}

fn encode(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

impl BoltzmannData {
    pub fn new(dims: &[usize], r: RatMatrix) -> Result<Self> {
        Self::new_super(&dims.iter().map(|&d| (d, 0)).collect::<Vec<_>>(), r)
    }

    pub fn new_super(parity_dims: &[(usize, usize)], r: RatMatrix) -> Result<Self> {
        if parity_dims.is_empty() || parity_dims.iter().any(|&(e, o)| e + o == 0) {
            return Err(Error::Invalid("need d ≥ 1 nonzero spaces".into()));
        }
        let n = parity_dims.iter().map(|&(e, o)| e + o).product::<usize>();
        if r.rows() != n || r.cols() != n {
            return Err(Error::Dimension(format!("R must be {n}×{n}, got {}×{}", r.rows(), r.cols())));
        }
        Ok(BoltzmannData { parity_dims: parity_dims.to_vec(), r })
    }

    pub fn d(&self) -> usize {
        self.parity_dims.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parity_dims.iter().map(|&(e, o)| e + o).collect()
    }

    pub fn is_super(&self) -> bool {
        self.parity_dims.iter().any(|&(_, o)| o > 0)
    }

    /// Parity of basis vector `a` of V_i (even part first).
    pub fn parity(&self, i: usize, a: usize) -> usize {
        (a >= self.parity_dims[i].0) as usize
    }

    pub fn entry(&self, out: &[usize], inp: &[usize]) -> &BigRational {
        let dims = self.dims();
        self.r.get(encode(out, &dims), encode(inp, &dims))
    }

    /// A ⊗ B for d = 2.
    pub fn product(a: &RatMatrix, b: &RatMatrix) -> Result<Self> {
        let (da, db) = (a.rows(), b.rows());
        let mut r = RatMatrix::zeros(da * db, da * db);
        for i in 0..da {
            for j in 0..da {
                for k in 0..db {
                    for l in 0..db {
                        r.set(i * db + k, j * db + l, a.get(i, j) * b.get(k, l));
                    }
                }
            }
        }
        Self::new(&[da, db], r)
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        Self::new(dims, RatMatrix::identity(total_dim(dims)))
    }

    /// Seeded entries p/q with |p| ≤ 3, q ∈ {1, 2, 3}.
    pub fn random(dims: &[usize], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = total_dim(dims);
        let data = (0..n * n)
            .map(|_| BigRational::new(BigInt::from(rng.gen_range(-3..=3)), BigInt::from(rng.gen_range(1..=3))))
            .collect();
        Self::new(dims, RatMatrix::from_vec(n, n, data)?)
    }

    /// Same operator with the two factors exchanged (d = 2).
    pub fn swapped(&self) -> Result<Self> {
        if self.d() != 2 {
            return Err(Error::Invalid("swap needs d = 2".into()));
        }
        let dims = self.dims();
        let n = total_dim(&dims);
        let sw = [dims[1], dims[0]];
        let mut r = RatMatrix::zeros(n, n);
        for o in 0..n {
            let od = decode(o, &dims);
            for i in 0..n {
                let id = decode(i, &dims);
                r.set(encode(&[od[1], od[0]], &sw), encode(&[id[1], id[0]], &sw), self.r.get(o, i).clone());
            }
        }
        let pd = vec![self.parity_dims[1], self.parity_dims[0]];
        Self::new_super(&pd, r)
    }

    pub fn to_json(&self) -> BoltzmannJson {
        BoltzmannJson {
            d: self.d(),
            dims: self.parity_dims.iter().map(|&(e, o)| [e, o]).collect(),
            entries: self.r.data().iter().map(rat_to_string).collect(),
        }
    }

    pub fn from_json(j: &BoltzmannJson) -> Result<Self> {
        if j.dims.len() != j.d {
            return Err(Error::Invalid(format!("d = {} but {} dims given", j.d, j.dims.len())));
        }
        let pd: Vec<(usize, usize)> = j.dims.iter().map(|v| (v[0], v[1])).collect();
        let n: usize = pd.iter().map(|&(e, o)| e + o).product();
        if j.entries.len() != n * n {
            return Err(Error::Dimension(format!("expected {} entries, got {}", n * n, j.entries.len())));
        }
        let data = j.entries.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?;
        Self::new_super(&pd, RatMatrix::from_vec(n, n, data)?)
    }
}

// ------------------------------------------------------------------ graphs

/// Vertices 0..N with one permutation per color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColoredGraph {
    pub vertices: usize,
    pub perms: Vec<Vec<usize>>,
}

impl ColoredGraph {
    pub fn new(vertices: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        for p in &perms {
            let mut seen = vec![false; vertices];
            if p.len() != vertices {
                return Err(Error::Dimension("permutation length differs from vertex count".into()));
            }
            for &v in p {
                if v >= vertices || seen[v] {
                    return Err(Error::Invalid("not a permutation".into()));
                }
                seen[v] = true;
            }
        }
        Ok(ColoredGraph { vertices, perms })
    }

    pub fn commuting(&self) -> bool {
        let n = self.vertices;
        self.perms.iter().enumerate().all(|(i, a)| {
            self.perms[..i].iter().all(|b| (0..n).all(|v| a[b[v]] == b[a[v]]))
        })
    }
}

/// One copy of R per vertex; the c-colored output of v is contracted with
/// the c-colored input of τ_c(v). Vertices are absorbed one at a time while
/// the labels of half-contracted edges are kept as state.
pub fn partition_graph(b: &BoltzmannData, g: &ColoredGraph) -> Result<BigRational> {
    let d = b.d();
    if g.perms.len() != d {
        return Err(Error::Dimension(format!("graph has {} colors, model has d = {d}", g.perms.len())));
    }
    let dims = b.dims();
    let nv = g.vertices;
    let mut inv = vec![vec![0; nv]; d];
    for c in 0..d {
        for v in 0..nv {
            inv[c][g.perms[c][v]] = v;
        }
    }
    // edge v*d + c: output c of v, input c of τ_c(v)
    let mut last_use = vec![0usize; nv * d];
    for v in 0..nv {
        for c in 0..d {
            let e = v * d + c;
            last_use[e] = v.max(g.perms[c][v]);
        }
    }
    let mut open: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u8>, BigRational> = HashMap::new();
    states.insert(Vec::new(), BigRational::one());
    for v in 0..nv {
        let outs: Vec<usize> = (0..d).map(|c| v * d + c).collect();
        let ins: Vec<usize> = (0..d).map(|c| inv[c][v] * d + c).collect();
        let mut fresh: Vec<usize> = Vec::new();
        for &e in outs.iter().chain(&ins) {
            if !open.contains(&e) && !fresh.contains(&e) {
                fresh.push(e);
            }
        }
        let fresh_dims: Vec<usize> = fresh.iter().map(|e| dims[e % d]).collect();
        let combos: usize = fresh_dims.iter().product();
        let mut next_open: Vec<usize> = open.iter().chain(&fresh).copied().filter(|&e| last_use[e] != v).collect();
        next_open.sort_unstable();
        check_budget("contraction states", (states.len() as u128) * combos as u128, CONTRACTION_BUDGET * 8)?;
        let mut next: HashMap<Vec<u8>, BigRational> = HashMap::new();
        let mut label: HashMap<usize, usize> = HashMap::new();
        for (st, w) in &states {
            label.clear();
            for (i, &e) in open.iter().enumerate() {
                label.insert(e, st[i] as usize);
            }
            for combo in 0..combos {
                let digits = decode(combo, &fresh_dims);
                for (i, &e) in fresh.iter().enumerate() {
                    label.insert(e, digits[i]);
                }
                let out: Vec<usize> = outs.iter().map(|e| label[e]).collect();
                let inp: Vec<usize> = ins.iter().map(|e| label[e]).collect();
                let r = b.entry(&out, &inp);
                if r.is_zero() {
                    continue;
                }
                let key: Vec<u8> = next_open.iter().map(|e| label[e] as u8).collect();
                let val = w * r;
                next.entry(key).and_modify(|x| *x += &val).or_insert(val);
            }
        }
        next.retain(|_, x| !x.is_zero());
        check_budget("contraction states", next.len() as u128, CONTRACTION_BUDGET)?;
        states = next;
        open = next_open;
    }
    Ok(states.remove(&Vec::new()).unwrap_or_else(BigRational::zero))
}

// --------------------------------------------------------------- sublattices

/// Λ ⊂ Z^d by a basis in column Hermite form: upper triangular, positive
/// diagonal, entries right of the diagonal reduced into [0, h_ii).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SublatticeD {
    /// columns generate Λ
    pub basis: Vec<Vec<i64>>,
}

impl SublatticeD {
    /// From generating columns (basis[i][j] = row i of column j).
    pub fn new(basis: Vec<Vec<i64>>) -> Result<Self> {
        let d = basis.len();
        if d == 0 || basis.iter().any(|r| r.len() != d) {
            return Err(Error::Dimension("basis must be a nonempty square matrix".into()));
        }
        let mut h: Vec<Vec<i128>> = basis.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
        for i in (0..d).rev() {
            // clear row i in columns 0..i, pivot in column i
            for j in 0..i {
                while h[i][j] != 0 {
                    if h[i][i] == 0 || h[i][j].abs() < h[i][i].abs() {
                        for row in h.iter_mut() {
                            row.swap(i, j);
                        }
                        continue;
                    }
                    let t = Integer::div_floor(&h[i][j], &h[i][i]);
                    for row in h.iter_mut() {
                        row[j] -= t * row[i];
                    }
                }
            }
            if h[i][i] == 0 {
                return Err(Error::Invalid("basis vectors are linearly dependent".into()));
            }
            if h[i][i] < 0 {
                for row in h.iter_mut() {
                    row[i] = -row[i];
                }
            }
        }
        for i in (0..d).rev() {
            for j in i + 1..d {
                let t = Integer::div_floor(&h[i][j], &h[i][i]);
                for row in h.iter_mut() {
                    row[j] -= t * row[i];
                }
            }
        }
        let basis = h
            .iter()
            .map(|r| r.iter().map(|&v| i64::try_from(v).map_err(|_| Error::Invalid("basis entry overflow".into()))).collect())
            .collect::<Result<Vec<Vec<i64>>>>()?;
        Ok(SublatticeD { basis })
    }

    /// Λ_{n,m,k} = Z·(n,0) ⊕ Z·(k,m).
    pub fn nmk(n: i64, m: i64, k: i64) -> Result<Self> {
        Self::new(vec![vec![n, k], vec![0, m]])
    }

    /// n_1 Z ⊕ … ⊕ n_d Z.
    pub fn diagonal(ns: &[i64]) -> Result<Self> {
        let d = ns.len();
        Self::new((0..d).map(|i| (0..d).map(|j| if i == j { ns[i] } else { 0 }).collect()).collect())
    }

    pub fn d(&self) -> usize {
        self.basis.len()
    }

    pub fn index(&self) -> u64 {
        (0..self.d()).map(|i| self.basis[i][i] as u64).product()
    }

    /// Λ ⊕ Z·n e_{d+1}.
    pub fn extend(&self, n: i64) -> Result<Self> {
        let d = self.d();
        let mut b: Vec<Vec<i64>> = self.basis.iter().map(|r| {
            let mut r = r.clone();
            r.push(0);
            r
        }).collect();
        let mut last = vec![0; d + 1];
        last[d] = n;
        b.push(last);
        Self::new(b)
    }

    /// Coset representative with 0 ≤ r_i < h_ii.
    fn reduce(&self, v: &mut [i64]) {
        for i in (0..self.d()).rev() {
            let t = Integer::div_floor(&v[i], &self.basis[i][i]);
            for (j, x) in v.iter_mut().enumerate() {
                *x -= t * self.basis[j][i];
            }
        }
    }
}

/// Vertices Z^d/Λ, τ_i translation by e_i.
pub fn sublattice_graph(lat: &SublatticeD) -> Result<ColoredGraph> {
    check_budget("lattice index", lat.index() as u128, INDEX_BUDGET)?;
    let d = lat.d();
    let radix: Vec<usize> = (0..d).map(|i| lat.basis[i][i] as usize).collect();
    let n = lat.index() as usize;
    let mut perms = vec![vec![0; n]; d];
    for v in 0..n {
        let r = decode(v, &radix);
        for (c, perm) in perms.iter_mut().enumerate() {
            let mut w: Vec<i64> = r.iter().map(|&x| x as i64).collect();
            w[c] += 1;
            lat.reduce(&mut w);
            perm[v] = encode(&w.iter().map(|&x| x as usize).collect::<Vec<_>>(), &radix);
        }
    }
    ColoredGraph::new(n, perms)
}

pub fn partition_lattice(b: &BoltzmannData, lat: &SublatticeD) -> Result<BigRational> {
    if lat.d() != b.d() {
        return Err(Error::Dimension("lattice and model dimensions differ".into()));
    }
    partition_graph(b, &sublattice_graph(lat)?)
}

// ---------------------------------------------------------- transfer matrices

/// T_{(2),n} = Trace over V_1^{⊗n} of (σ_n ⊗ id)∘R^{⊗n}, on V_2^{⊗n}:
/// T[b, b'] = Σ_a ∏_s R[(a_{s+1}, b_s), (a_s, b'_s)], indices mod n.
pub fn transfer_matrix(b: &BoltzmannData, n: usize) -> Result<RatMatrix> {
    transfer_with_signs(b, n, false)
}

/// T_{(1),m} on V_1^{⊗m}, tracing the V_2 cycles.
pub fn transfer_matrix_vertical(b: &BoltzmannData, m: usize) -> Result<RatMatrix> {
    transfer_matrix(&b.swapped()?, m)
}

fn transfer_with_signs(b: &BoltzmannData, n: usize, super_signs: bool) -> Result<RatMatrix> {
    if b.d() != 2 {
        return Err(Error::Invalid(format!("transfer matrices need d = 2, got {}", b.d())));
    }
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let dims = b.dims();
    let (d1, d2) = (dims[0], dims[1]);
    let size = (d2 as u128).saturating_pow(n as u32);
    check_budget("transfer matrix", size, OPERATOR_BUDGET)?;
    let size = size as usize;
    let rad1 = vec![d1; n];
    let rad2 = vec![d2; n];
    let loops = d1.pow(n as u32);
    let mut t = RatMatrix::zeros(size, size);
    for out in 0..size {
        let bo = decode(out, &rad2);
        for inp in 0..size {
            let bi = decode(inp, &rad2);
            let mut acc = BigRational::zero();
            for al in 0..loops {
                let a = decode(al, &rad1);
                let mut prod = BigRational::one();
                for s in 0..n {
                    let r = b.entry(&[a[(s + 1) % n], bo[s]], &[a[s], bi[s]]);
                    if r.is_zero() {
                        prod = BigRational::zero();
                        break;
                    }
                    prod *= r;
                }
                if prod.is_zero() {
                    continue;
                }
                if super_signs && super_loop_sign(b, &a) {
                    acc -= prod;
                } else {
                    acc += prod;
                }
            }
            t.set(out, inp, acc);
        }
    }
    Ok(t)
}

/// Parity of the traced V_1 labels times the Koszul sign of the cyclic move.
fn super_loop_sign(b: &BoltzmannData, a: &[usize]) -> bool {
    let p: Vec<usize> = a.iter().map(|&x| b.parity(0, x)).collect();
    let total: usize = p.iter().sum();
    let last = p[p.len() - 1];
    let koszul = last * (total - last);
    (total + koszul) % 2 == 1
}

fn mat_pow(m: &RatMatrix, k: u32) -> RatMatrix {
    let mut acc = RatMatrix::identity(m.rows());
    for _ in 0..k {
        acc = acc.mul(m);
    }
    acc
}

/// Trace(M^k) for k = 1..=kmax.
pub fn power_traces_rat(m: &RatMatrix, kmax: usize) -> Vec<BigRational> {
    // integer powers of L·M; Trace(M^k) = Trace((L·M)^k) / L^k
    let (l, a) = m.clear_denominators();
    let n = a.len();
    let mut out = Vec::with_capacity(kmax);
    let mut p = a.clone();
    let mut lk = l.clone();
    for k in 1..=kmax {
        let tr: BigInt = (0..n).map(|i| &p[i][i]).sum();
        out.push(BigRational::new(tr, lk.clone()));
        if k < kmax {
            p = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).filter(|&t| !p[i][t].is_zero()).map(|t| &p[i][t] * &a[t][j]).sum())
                        .collect()
                })
                .collect();
            lk *= &l;
        }
    }
    out
}

/// C_n on V_2^{⊗n}: C[b, b'] = 1 iff b_s = b'_{s+1} for all s.
pub fn cyclic_shift(dim: usize, n: usize) -> Result<RatMatrix> {
    let size = (dim as u128).saturating_pow(n as u32);
    check_budget("cyclic shift", size, OPERATOR_BUDGET)?;
    let size = size as usize;
    let rad = vec![dim; n];
    let mut c = RatMatrix::zeros(size, size);
    for src in 0..size {
        let bp = decode(src, &rad);
        let bo: Vec<usize> = (0..n).map(|s| bp[(s + 1) % n]).collect();
        c.set(encode(&bo, &rad), src, BigRational::one());
    }
    Ok(c)
}

/// Trace(T_{(2),n}^m · C_n^k) for Λ_{n,m,k}.
pub fn partition_sheared(b: &BoltzmannData, n: usize, m: u32, k: u32) -> Result<BigRational> {
    let t = transfer_matrix(b, n)?;
    let c = cyclic_shift(b.dims()[1], n)?;
    Ok(mat_pow(&t, m).mul(&mat_pow(&c, k)).trace())
}

// ------------------------------------------------------- dimensional reduction

/// R_(n): V_i' = V_i^{⊗n} for i < d and R' the cyclic trace of n copies of R
/// stacked along e_d,
/// R'[(o_1..o_{d−1}), (i_1..i_{d−1})] = Σ_c ∏_s R[(o_1[s],…, c_{s+1}), (i_1[s],…, c_s)].
pub fn dimensional_reduction(b: &BoltzmannData, n: usize) -> Result<BoltzmannData> {
    let d = b.d();
    if d < 2 {
        return Err(Error::Invalid("dimensional reduction needs d ≥ 2".into()));
    }
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    if b.is_super() {
        return Err(Error::Invalid("super data is only supported through supertrace_transfer".into()));
    }
    let dims = b.dims();
    let new_dims: Vec<usize> = dims[..d - 1].iter().map(|&v| v.pow(n as u32)).collect();
    let size = new_dims.iter().map(|&v| v as u128).product::<u128>();
    check_budget("reduced operator", size, OPERATOR_BUDGET)?;
    let size = size as usize;
    let cyc = vec![dims[d - 1]; n];
    let loops = dims[d - 1].pow(n as u32);
    let site = |big: &[usize], s: usize| -> Vec<usize> {
        // digit s of each V_i^{⊗n} index
        big.iter().enumerate().map(|(i, &x)| decode(x, &vec![dims[i]; n])[s]).collect()
    };
    let mut r = RatMatrix::zeros(size, size);
    for o in 0..size {
        let od = decode(o, &new_dims);
        let osites: Vec<Vec<usize>> = (0..n).map(|s| site(&od, s)).collect();
        for i in 0..size {
            let id = decode(i, &new_dims);
            let isites: Vec<Vec<usize>> = (0..n).map(|s| site(&id, s)).collect();
            let mut acc = BigRational::zero();
            for cl in 0..loops {
                let c = decode(cl, &cyc);
                let mut prod = BigRational::one();
                for s in 0..n {
                    let mut out = osites[s].clone();
                    out.push(c[(s + 1) % n]);
                    let mut inp = isites[s].clone();
                    inp.push(c[s]);
                    let e = b.entry(&out, &inp);
                    if e.is_zero() {
                        prod = BigRational::zero();
                        break;
                    }
                    prod *= e;
                }
                acc += prod;
            }
            r.set(o, i, acc);
        }
    }
    BoltzmannData::new(&new_dims, r)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionCase {
    pub lattice: Vec<Vec<i64>>,
    pub n: usize,
    pub reduced: String,
    pub direct: String,
    pub equal: bool,
}

/// Z_{R_(n)}(Λ') against Z_R(Λ' ⊕ Z·n e_d), both by graph contraction.
pub fn dimensional_reduction_check(b: &BoltzmannData, n: usize, lattices: &[SublatticeD]) -> Result<Vec<ReductionCase>> {
    let red = dimensional_reduction(b, n)?;
    lattices
        .iter()
        .map(|l| {
            let lhs = partition_lattice(&red, l)?;
            let rhs = partition_lattice(b, &l.extend(n as i64)?)?;
            Ok(ReductionCase {
                lattice: l.basis.clone(),
                n,
                reduced: rat_to_string(&lhs),
                direct: rat_to_string(&rhs),
                equal: lhs == rhs,
            })
        })
        .collect()
}

// -------------------------------------------------------------------- super

#[derive(Debug, Clone, Serialize)]
pub struct SuperTransfer {
    pub n: usize,
    pub matrix: Vec<Vec<String>>,
    /// str(T^m) over V_2^{⊗n}, m = 1..
    pub supertraces: Vec<String>,
}

/// Transfer matrix with the V_1 trace replaced by the supertrace of the
/// Koszul-signed cyclic permutation (d = 2, R even).
pub fn supertrace_transfer(b: &BoltzmannData, n: usize, m_max: usize) -> Result<(RatMatrix, Vec<BigRational>)> {
    if b.d() != 2 {
        return Err(Error::Invalid(format!("super transfer is implemented for d = 2 only, got d = {}", b.d())));
    }
    let dims = b.dims();
    let total = total_dim(&dims);
    let parity = |idx: usize| {
        let dg = decode(idx, &dims);
        (b.parity(0, dg[0]) + b.parity(1, dg[1])) % 2
    };
    for o in 0..total {
        for i in 0..total {
            if parity(o) != parity(i) && !b.r.get(o, i).is_zero() {
                return Err(Error::Invalid("R must preserve parity".into()));
            }
        }
    }
    let t = transfer_with_signs(b, n, true)?;
    let rad = vec![dims[1]; n];
    let sign2: Vec<bool> = (0..t.rows())
        .map(|x| decode(x, &rad).iter().map(|&v| b.parity(1, v)).sum::<usize>() % 2 == 1)
        .collect();
    let mut p = t.clone();
    let mut strs = Vec::new();
    for k in 1..=m_max {
        let mut s = BigRational::zero();
        for (x, &neg) in sign2.iter().enumerate() {
            if neg {
                s -= p.get(x, x);
            } else {
                s += p.get(x, x);
            }
        }
        strs.push(s);
        if k < m_max {
            p = p.mul(&t);
        }
    }
    Ok((t, strs))
}

// ---------------------------------------------------------------- suites

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub dims: Vec<usize>,
    pub seed: u64,
    pub cases: usize,
    pub recurrences: TableRecurrences,
    pub checks: Vec<Check>,
}

/// Graph contraction against both transfer orientations and the sheared
/// formula, for n, m ≤ size_max and k < n; plus recurrences along lines.
pub fn transfer_check(dims: &[usize], seed: u64, size_max: usize, line_len: usize) -> Result<TransferReport> {
    let b = BoltzmannData::random(dims, seed)?;
    let mut bad_rect = Vec::new();
    let mut bad_shear = Vec::new();
    let mut cases = 0;
    for n in 1..=size_max {
        let t2 = transfer_matrix(&b, n)?;
        let c = cyclic_shift(dims[1], n)?;
        for m in 1..=size_max {
            let t1 = transfer_matrix_vertical(&b, m)?;
            let horizontal = mat_pow(&t2, m as u32).trace();
            let vertical = mat_pow(&t1, n as u32).trace();
            let graph = partition_lattice(&b, &SublatticeD::nmk(n as i64, m as i64, 0)?)?;
            cases += 1;
            if horizontal != graph || vertical != graph {
                bad_rect.push(json!({"n": n, "m": m, "graph": rat_to_string(&graph),
                    "horizontal": rat_to_string(&horizontal), "vertical": rat_to_string(&vertical)}));
            }
            for k in 1..n {
                let sheared = mat_pow(&t2, m as u32).mul(&mat_pow(&c, k as u32)).trace();
                let graph = partition_lattice(&b, &SublatticeD::nmk(n as i64, m as i64, k as i64)?)?;
                cases += 1;
                if sheared != graph {
                    bad_shear.push(json!({"n": n, "m": m, "k": k, "graph": rat_to_string(&graph), "sheared": rat_to_string(&sheared)}));
                }
            }
        }
    }
    // rows: fixed n, m = 1..line_len; columns: fixed m, n = 1..line_len
    let rows: Vec<Vec<BigRational>> =
        (1..=size_max).map(|n| Ok(power_traces_rat(&transfer_matrix(&b, n)?, line_len))).collect::<Result<_>>()?;
    let cols: Vec<Vec<BigRational>> = (1..=size_max)
        .map(|m| Ok(power_traces_rat(&transfer_matrix_vertical(&b, m)?, line_len)))
        .collect::<Result<_>>()?;
    let mut recurrences = table_recurrences_rat(&rows);
    recurrences.columns = table_recurrences_rat(&cols).rows;
    let rec_ok = recurrences.rows.iter().chain(&recurrences.columns).all(|h| h.matches == Some(true));
    let checks = vec![
        Check::from_outcome("graph-vs-transfer", bad_rect.is_empty(), Some(json!(bad_rect))),
        Check::from_outcome("graph-vs-sheared", bad_shear.is_empty(), Some(json!(bad_shear))),
        Check::from_outcome("line-recurrences", rec_ok, None),
    ];
    Ok(TransferReport { dims: dims.to_vec(), seed, cases, recurrences, checks })
}

/// Line length that lets every row and column of a size_max table fit a
/// recurrence with one term to spare.
pub fn line_length_for(dims: &[usize], size_max: usize) -> usize {
    let big = dims.iter().map(|&d| d.pow(size_max as u32)).max().unwrap_or(1);
    2 * big + 1
}

/// Exact integer value of a rational, if it is one.
pub fn as_integer(v: &BigRational) -> Option<i64> {
    v.is_integer().then(|| v.to_integer().to_i64()).flatten()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn identity_model() {
        let b = BoltzmannData::identity(&[2, 3]).unwrap();
        for (n, m) in [(1, 1), (2, 3), (3, 2)] {
            let z = partition_lattice(&b, &SublatticeD::nmk(n, m, 0).unwrap()).unwrap();
            assert_eq!(z, q(2i64.pow(m as u32) * 3i64.pow(n as u32)));
        }
    }

    #[test]
    fn product_model() {
        let a = RatMatrix::from_i64_rows(&[vec![1, 2], vec![0, 3]]).unwrap();
        let bm = RatMatrix::from_i64_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let b = BoltzmannData::product(&a, &bm).unwrap();
        for (n, m) in [(1u32, 1u32), (2, 1), (2, 3), (3, 2)] {
            let z = partition_lattice(&b, &SublatticeD::nmk(n as i64, m as i64, 0).unwrap()).unwrap();
            let want = mat_pow(&a, n).trace().pow(m as i32) * mat_pow(&bm, m).trace().pow(n as i32);
            assert_eq!(z, want);
        }
    }

    #[test]
    fn single_vertex_is_trace() {
        let b = BoltzmannData::random(&[2, 2], 3).unwrap();
        let z = partition_lattice(&b, &SublatticeD::nmk(1, 1, 0).unwrap()).unwrap();
        assert_eq!(z, b.r.trace());
        let t = transfer_matrix(&b, 1).unwrap();
        assert_eq!(t.trace(), b.r.trace());
    }

    #[test]
    fn lattice_graphs() {
        let g = sublattice_graph(&SublatticeD::nmk(2, 3, 0).unwrap()).unwrap();
        assert_eq!(g.vertices, 6);
        assert!(g.commuting());
        let g = sublattice_graph(&SublatticeD::nmk(2, 2, 1).unwrap()).unwrap();
        assert_eq!(g.vertices, 4);
        assert!(g.commuting());
        // going up twice from the origin lands on (−1, 0) ≡ (1, 0)
        let up2 = g.perms[1][g.perms[1][0]];
        assert_eq!(up2, g.perms[0][0]);
    }

    #[test]
    fn hermite_form() {
        let l = SublatticeD::new(vec![vec![2, 1], vec![2, -1]]).unwrap();
        assert_eq!(l.index(), 4);
        assert_eq!(l, SublatticeD::new(vec![vec![3, 2], vec![1, 2]]).unwrap());
        assert!(SublatticeD::new(vec![vec![1, 2], vec![2, 4]]).is_err());
    }

    #[test]
    fn sheared_matches_graph() {
        let b = BoltzmannData::random(&[2, 2], 11).unwrap();
        let z = partition_sheared(&b, 2, 2, 1).unwrap();
        assert_eq!(z, partition_lattice(&b, &SublatticeD::nmk(2, 2, 1).unwrap()).unwrap());
        assert_eq!(partition_sheared(&b, 3, 1, 4).unwrap(), partition_sheared(&b, 3, 1, 1).unwrap());
    }

    #[test]
    fn reduction_to_one_dimension() {
        let b = BoltzmannData::random(&[2, 2], 5).unwrap();
        let r1 = dimensional_reduction(&b, 1).unwrap();
        // n = 1: partial trace over V_2
        let mut pt = RatMatrix::zeros(2, 2);
        for o in 0..2 {
            for i in 0..2 {
                pt.set(o, i, b.entry(&[o, 0], &[i, 0]) + b.entry(&[o, 1], &[i, 1]));
            }
        }
        assert_eq!(r1.r, pt);
        let cases = dimensional_reduction_check(&b, 2, &[SublatticeD::diagonal(&[1]).unwrap(), SublatticeD::diagonal(&[3]).unwrap()]).unwrap();
        assert!(cases.iter().all(|c| c.equal), "{cases:?}");
    }

    #[test]
    fn reduction_from_three_dimensions() {
        let b = BoltzmannData::random(&[2, 2, 2], 21).unwrap();
        let lats = [
            SublatticeD::nmk(1, 1, 0).unwrap(),
            SublatticeD::nmk(2, 1, 0).unwrap(),
            SublatticeD::nmk(2, 2, 1).unwrap(),
        ];
        let cases = dimensional_reduction_check(&b, 2, &lats).unwrap();
        assert!(cases.iter().all(|c| c.equal), "{cases:?}");
    }

    #[test]
    fn reduction_composes() {
        // reducing twice along the last axis gives the 1-d model on Λ ⊕ n1 Z ⊕ n2 Z
        let b = BoltzmannData::random(&[2, 2, 2], 4).unwrap();
        let r2 = dimensional_reduction(&dimensional_reduction(&b, 2).unwrap(), 1).unwrap();
        for n in 1..=3 {
            let lhs = partition_lattice(&r2, &SublatticeD::diagonal(&[n]).unwrap()).unwrap();
            let rhs = partition_lattice(&b, &SublatticeD::diagonal(&[n, 1, 2]).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn transfer_suite_small() {
        let rep = transfer_check(&[2, 2], 7, 3, line_length_for(&[2, 2], 3)).unwrap();
        assert!(rep.checks.iter().all(|c| c.passed()), "{:?}", rep.checks);
    }

    #[test]
    fn super_diagonal() {
        // V_1 = 1|1, V_2 = 1|0, R = diag(λ, μ)
        let (l, m) = (3, 2);
        let r = RatMatrix::from_i64_rows(&[vec![l, 0], vec![0, m]]).unwrap();
        let b = BoltzmannData::new_super(&[(1, 1), (1, 0)], r).unwrap();
        for n in 1..=4 {
            let (t, _) = supertrace_transfer(&b, n, 1).unwrap();
            assert_eq!(t.get(0, 0).clone(), q(l.pow(n as u32) - m.pow(n as u32)));
            let plain = transfer_matrix(&b, n).unwrap();
            assert_eq!(plain.get(0, 0).clone(), q(l.pow(n as u32) + m.pow(n as u32)));
        }
        let even = BoltzmannData::random(&[2, 2], 1).unwrap();
        assert_eq!(supertrace_transfer(&even, 2, 1).unwrap().0, transfer_matrix(&even, 2).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let b = BoltzmannData::random(&[2, 3], 9).unwrap();
        let j = serde_json::to_string(&b.to_json()).unwrap();
        let back = BoltzmannData::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, b);
    }
}
