//! Trees of bouquets of spheres attached to collections of independent
//! scalings, maps between them, critical bookkeeping and preimage counts.
//!
//! Sphere `i` of a tree carries the coordinate `ρ_i`; `a[i][j]` is the point
//! of `C̄_j` onto which all of `C̄_i` projects, i.e. the reduction of
//! `lim A_{j,k} ∘ A_{i,k}⁻¹`.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::limits;
use crate::par::{self, Exec};
use crate::ratmap::{self, ProjectiveRatMap};
use crate::rescaling::{self, FamilySpec, TPoly, XMoebius};
use crate::scalar::GaussRat;
use crate::sphere::{MoebiusClass, MoebiusMap, PointJson, SpherePoint};

/// Points identified across spheres: `(sphere index, coordinate)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gluing {
    pub members: Vec<(usize, SpherePoint)>,
}

#[derive(Clone, Debug)]
pub struct SphereTree {
    /// Index set `J` (caller labels).
    pub labels: Vec<usize>,
    /// `a[i][j] = a_{i,j} ∈ C̄_j`, snapped to 0, 1, ∞ within `tau_pt`.
    pub a: Vec<Vec<Option<SpherePoint>>>,
    pub a_raw: Vec<Vec<Option<SpherePoint>>>,
    pub gluings: Vec<Gluing>,
    /// Pairs of sphere indices sharing a point.
    pub adjacency: Vec<(usize, usize)>,
}

impl SphereTree {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `ρ_j` of the point `z ∈ C̄_i`; constant `a_{i,j}` off the diagonal.
    pub fn retract(&self, i: usize, z: &SpherePoint, j: usize) -> SpherePoint {
        if i == j {
            *z
        } else {
            self.a[i][j].unwrap()
        }
    }

    /// Point `z ∈ C̄_i` as an element of `C̄^J`.
    pub fn embed(&self, i: usize, z: &SpherePoint) -> Vec<SpherePoint> {
        (0..self.len()).map(|j| self.retract(i, z, j)).collect()
    }

    /// Distance in the max-chordal metric from `x ∈ C̄^J` to the tree, with
    /// the nearest sphere.
    pub fn distance_to(&self, x: &[SpherePoint]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for i in 0..self.len() {
            let d = (0..self.len())
                .filter(|&j| j != i)
                .map(|j| x[j].chordal(&self.a[i][j].unwrap()))
                .fold(0.0, f64::max);
            if d < best.0 {
                best = (d, i);
            }
        }
        best
    }

    /// Canonical representative of `z ∈ C̄_i`: the first member of its gluing
    /// class if `z` is a gluing point.
    pub fn canonical(&self, i: usize, z: &SpherePoint, tol: f64) -> (usize, SpherePoint) {
        for g in &self.gluings {
            if g.members.iter().any(|(s, p)| *s == i && p.chordal(z) <= tol) {
                return g.members[0];
            }
        }
        (i, *z)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Member {
            sphere: usize,
            point: PointJson,
        }
        let a: Vec<Vec<Option<PointJson>>> = self
            .a
            .iter()
            .map(|r| r.iter().map(|p| p.map(PointJson::from)).collect())
            .collect();
        let gluings: Vec<Vec<Member>> = self
            .gluings
            .iter()
            .map(|g| {
                g.members
                    .iter()
                    .map(|(s, p)| Member {
                        sphere: self.labels[*s],
                        point: PointJson::from(*p),
                    })
                    .collect()
            })
            .collect();
        let adjacency: Vec<(usize, usize)> = self
            .adjacency
            .iter()
            .map(|(i, j)| (self.labels[*i], self.labels[*j]))
            .collect();
        serde_json::json!({
            "spheres": self.labels,
            "a": a,
            "gluings": gluings,
            "adjacency": adjacency,
        })
    }

    /// Graphviz description: spheres as ellipses, gluing points as dots.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph tree {\n");
        for l in &self.labels {
            s.push_str(&format!("  s{l} [label=\"C{l}\"];\n"));
        }
        for (g, glue) in self.gluings.iter().enumerate() {
            s.push_str(&format!("  g{g} [shape=point];\n"));
            for (i, p) in &glue.members {
                s.push_str(&format!("  s{} -- g{g} [label=\"{}\"];\n", self.labels[*i], fmt_point(p)));
            }
        }
        s.push_str("}\n");
        s
    }
}

fn fmt_point(p: &SpherePoint) -> String {
    match p.to_complex() {
        None => "inf".into(),
        Some(c) if c.im == 0.0 => format!("{}", c.re),
        Some(c) => format!("{}{:+}i", c.re, c.im),
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    /// Returns false when already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Builds the tree from classified pairwise limits; `pair(i, j)` is the
/// class of `lim A_{j,k} ∘ A_{i,k}⁻¹` for `i < j`.
pub fn tree_from_pairwise<F>(labels: &[usize], tol: &Tolerances, pair: F) -> Result<SphereTree>
where
    F: Fn(usize, usize) -> Result<MoebiusClass>,
{
    let n = labels.len();
    if n == 0 {
        return Err(Error::Schema("empty index set".into()));
    }
    let mut a_raw = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            match pair(i, j)? {
                MoebiusClass::Nondegenerate(_) => return Err(Error::NotIndependent(labels[i], labels[j])),
                MoebiusClass::Degenerate { reduction, hole } => {
                    a_raw[i][j] = Some(reduction);
                    a_raw[j][i] = Some(hole);
                }
            }
        }
    }
    let a: Vec<Vec<Option<SpherePoint>>> = a_raw
        .iter()
        .map(|r| r.iter().map(|p| p.map(|q| q.snap_canonical(tol.tau_pt))).collect())
        .collect();
    let same = |p: &Option<SpherePoint>, q: &Option<SpherePoint>| p.unwrap().chordal(&q.unwrap()) <= tol.tau_glue;

    // Ports: distinct points a_{j,i} on each sphere i.
    let mut ports: Vec<(usize, SpherePoint)> = Vec::new();
    let port_of = |ports: &mut Vec<(usize, SpherePoint)>, i: usize, p: SpherePoint| -> usize {
        if let Some(k) = ports.iter().position(|(s, q)| *s == i && q.chordal(&p) <= tol.tau_glue) {
            return k;
        }
        ports.push((i, p));
        ports.len() - 1
    };
    let mut adjacency = Vec::new();
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let glued = (0..n)
                .filter(|&m| m != i && m != j)
                .all(|m| same(&a[i][m], &a[j][m]));
            if glued {
                adjacency.push((i, j));
                let pi = port_of(&mut ports, i, a[j][i].unwrap());
                let pj = port_of(&mut ports, j, a[i][j].unwrap());
                links.push((pi, pj));
            }
        }
    }
    let mut uf = UnionFind::new(ports.len());
    for (p, q) in &links {
        uf.union(*p, *q);
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_class = std::collections::BTreeMap::new();
    for k in 0..ports.len() {
        let r = uf.find(k);
        let c = *root_class.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(k);
    }
    let gluings: Vec<Gluing> = classes
        .iter()
        .map(|c| Gluing {
            members: c.iter().map(|k| ports[*k]).collect(),
        })
        .collect();

    // Incidence graph: spheres 0..n, gluing points n.. .
    let mut g = UnionFind::new(n + gluings.len());
    for (c, glue) in gluings.iter().enumerate() {
        for (s, p) in &glue.members {
            if !g.union(*s, n + c) {
                return Err(Error::NotATree(format!(
                    "cycle through sphere {} at {}",
                    labels[*s],
                    fmt_point(p)
                )));
            }
        }
    }
    let r0 = g.find(0);
    if let Some(i) = (1..n).find(|&i| g.find(i) != r0) {
        return Err(Error::NotATree(format!("sphere {} is disconnected", labels[i])));
    }
    Ok(SphereTree {
        labels: labels.to_vec(),
        a,
        a_raw,
        gluings,
        adjacency,
    })
}

/// Tree of float scalings `scalings[i][k]` sampled at `eps[k] → 0`.
pub fn build_tree(labels: &[usize], scalings: &[Vec<MoebiusMap>], eps: &[f64], tol: &Tolerances) -> Result<SphereTree> {
    if scalings.len() != labels.len() || scalings.iter().any(|s| s.len() != eps.len()) {
        return Err(Error::Schema("scalings must match labels and schedule".into()));
    }
    tree_from_pairwise(labels, tol, |i, j| {
        let seq: Vec<MoebiusMap> = (0..eps.len())
            .map(|k| scalings[j][k].compose(&scalings[i][k].inverse()).normalized())
            .collect();
        let (lim, _) = limits::moebius_limit(eps, &seq, tol)?;
        Ok(lim.classify(tol))
    })
}

/// Tree of exact scalings, e.g. levels of a rescaling scheme.
pub fn build_tree_exact(
    labels: &[usize],
    scalings: &[Vec<XMoebius>],
    eps: &[f64],
    tol: &Tolerances,
) -> Result<SphereTree> {
    if scalings.len() != labels.len() || scalings.iter().any(|s| s.len() != eps.len()) {
        return Err(Error::Schema("scalings must match labels and schedule".into()));
    }
    tree_from_pairwise(labels, tol, |i, j| rescaling::pairwise_limit(scalings, eps, i, j, tol))
}

/// `m` quasi-uniform points on the sphere (Fibonacci lattice).
pub fn sphere_grid(m: usize) -> Vec<SpherePoint> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
            let r = (1.0 - y * y).sqrt();
            let th = golden * i as f64;
            SpherePoint::from_stereographic([r * th.cos(), r * th.sin(), y])
        })
        .collect()
}

/// Sampled two-sided Hausdorff distance (max-chordal metric on `C̄^J`)
/// between `𝒜_k(C̄)` and the tree, using `grid` points per sphere.
pub fn hausdorff_residual(
    tree: &SphereTree,
    scalings: &[Vec<MoebiusMap>],
    k: usize,
    grid: usize,
    exec: Exec,
) -> Result<f64> {
    let n = tree.len();
    let pts = sphere_grid(grid);
    let ak: Vec<MoebiusMap> = scalings.iter().map(|s| s[k].normalized()).collect();
    let embed = |z: &SpherePoint| -> Option<Vec<SpherePoint>> { ak.iter().map(|m| m.apply_raw(z)).collect() };
    // Parameters: the grid itself and its pull-backs by every A_{i,k}.
    let mut params: Vec<SpherePoint> = pts.clone();
    for m in &ak {
        let inv = m.inverse();
        params.extend(pts.iter().filter_map(|w| inv.apply_raw(w)));
    }
    let samples: Vec<Vec<SpherePoint>> = par::map_slice(exec, &params, |z| embed(z)).into_iter().flatten().collect();
    if samples.is_empty() {
        return Err(Error::Schema("no embedded samples".into()));
    }
    let to_tree = par::map_slice(exec, &samples, |x| tree.distance_to(x).0)
        .into_iter()
        .fold(0.0, f64::max);
    let tree_pts: Vec<Vec<SpherePoint>> = (0..n)
        .flat_map(|i| pts.iter().map(move |w| (i, *w)))
        .map(|(i, w)| tree.embed(i, &w))
        .collect();
    let dist = |x: &[SpherePoint], y: &[SpherePoint]| x.iter().zip(y).map(|(p, q)| p.chordal(q)).fold(0.0, f64::max);
    let to_samples = par::map_slice(exec, &tree_pts, |x| {
        samples.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min)
    })
    .into_iter()
    .fold(0.0, f64::max);
    Ok(to_tree.max(to_samples))
}

/// Critical point of the induced map with multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalAtom {
    pub sphere: usize,
    pub point: SpherePoint,
    pub multiplicity: usize,
}

/// Critical points of `f_k` and the source scalings at one sample `k`.
#[derive(Clone, Debug)]
pub struct CriticalInput<'a> {
    pub map: &'a ProjectiveRatMap,
    pub scalings: Vec<MoebiusMap>,
    /// Sample index, recorded in the report.
    pub k: usize,
}

#[derive(Clone, Debug)]
pub struct TreeMapData {
    pub tau: Vec<usize>,
    pub transitions: Vec<ProjectiveRatMap>,
    pub fully_ramified: bool,
    /// Pairs `(n, n′)` checked for `φ_{n,τ(n)}(a_{n′,n}) = a_{τ(n′),τ(n)}`.
    pub edges_checked: usize,
    pub critical: Vec<CriticalAtom>,
    /// Sample index used for the critical limits.
    pub sample: Option<usize>,
    /// Largest distance from an embedded critical point to the tree.
    pub critical_residual: f64,
}

/// Induced map `F: S → S′` of a sequence mapping the scalings of `ta` into
/// those of `tb` by the bijection `tau` (sphere indices), with limits
/// `transitions[n] = φ_{n,τ(n)}`.
pub fn induced_map(
    ta: &SphereTree,
    tb: &SphereTree,
    tau: &[usize],
    transitions: &[ProjectiveRatMap],
    crit: Option<CriticalInput>,
    tol: &Tolerances,
) -> Result<TreeMapData> {
    let n = ta.len();
    if tau.len() != n || transitions.len() != n || tau.iter().any(|&j| j >= tb.len()) {
        return Err(Error::Schema("tau and transitions must cover every sphere".into()));
    }
    let mut seen = vec![false; tb.len()];
    for &j in tau {
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::HypothesisUnmet("tau is not injective".into()));
        }
    }
    let d = transitions[0].degree();
    let mut fully_ramified = true;
    for phi in transitions {
        if phi.degree() != d {
            return Err(Error::Schema("transitions differ in degree".into()));
        }
        fully_ramified &= !phi.is_degenerate(tol)?;
    }
    let glue_tol = tol.tau_glue.max(tol.tau_cluster);
    let mut edges_checked = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // Image of the point where C̄_j sits on C̄_i.
            let src = ta.a[j][i].unwrap();
            let target = tb.a[tau[j]][tau[i]].unwrap();
            let red = transitions[i].reduce(tol)?;
            let img = if red.depth_at(&src, tol.tau_cluster) > 0 {
                None
            } else {
                red.reduction.eval_raw(&src)
            };
            match img {
                Some(v) if v.chordal(&target) <= glue_tol => {}
                _ => return Err(Error::ContinuityFailure(ta.labels[i], ta.labels[j])),
            }
            edges_checked += 1;
        }
    }
    let mut data = TreeMapData {
        tau: tau.to_vec(),
        transitions: transitions.to_vec(),
        fully_ramified,
        edges_checked,
        critical: Vec::new(),
        sample: None,
        critical_residual: 0.0,
    };
    if let Some(c) = crit {
        critical_bookkeeping(ta, &mut data, &c, tol)?;
    }
    Ok(data)
}

fn critical_bookkeeping(ta: &SphereTree, data: &mut TreeMapData, c: &CriticalInput, tol: &Tolerances) -> Result<()> {
    let n = ta.len();
    if c.scalings.len() != n {
        return Err(Error::Schema("one scaling per sphere required".into()));
    }
    let d = data.transitions[0].degree();
    let f = c.map.to_float();
    let glue_tol = tol.tau_glue.max(tol.tau_cluster);
    let mut atoms: Vec<CriticalAtom> = Vec::new();
    let mut residual: f64 = 0.0;
    for (p, m) in f.critical_points(tol)? {
        let e: Vec<SpherePoint> = c
            .scalings
            .iter()
            .map(|a| a.apply_raw(&p).ok_or(Error::HoleEvaluation))
            .collect::<Result<_>>()?;
        let (dist, i) = ta.distance_to(&e);
        residual = residual.max(dist);
        let (s, z) = ta.canonical(i, &e[i].snap_canonical(tol.tau_pt), glue_tol);
        match atoms.iter_mut().find(|a| a.sphere == s && a.point.chordal(&z) <= glue_tol) {
            Some(a) => a.multiplicity += m,
            None => atoms.push(CriticalAtom {
                sphere: s,
                point: z,
                multiplicity: m,
            }),
        }
    }
    let total: usize = atoms.iter().map(|a| a.multiplicity).sum();
    if total != 2 * d - 2 {
        return Err(Error::CriticalCountMismatch(format!("total {total}, expected {}", 2 * d - 2)));
    }
    if data.fully_ramified {
        // Critical multiplicity of x under φ_{n,τ(n)} equals the mass of
        // Crit(F) in ρ_n⁻¹(x).
        for (nn, phi) in data.transitions.iter().enumerate() {
            let crits = phi.to_float().critical_points(tol)?;
            for (x, mult) in &crits {
                let mass: usize = atoms
                    .iter()
                    .filter(|a| ta.retract(a.sphere, &a.point, nn).chordal(x) <= glue_tol)
                    .map(|a| a.multiplicity)
                    .sum();
                if mass != *mult {
                    return Err(Error::CriticalCountMismatch(format!(
                        "sphere {}: critical point {} has multiplicity {mult}, tree mass {mass}",
                        ta.labels[nn],
                        fmt_point(x)
                    )));
                }
            }
        }
    }
    data.critical = atoms;
    data.sample = Some(c.k);
    data.critical_residual = residual;
    Ok(())
}

/// Predicted number of preimages near `z0 ∈ C̄_j` of points near
/// `w0 ∈ C̄_{τ(j)}`: `d_{z0}(φ) + [φ̃(z0) = w0]·deg_{z0} φ̃`.
pub fn preimage_count_predict(
    ta: &SphereTree,
    tb: &SphereTree,
    tau: &[usize],
    transitions: &[ProjectiveRatMap],
    j: usize,
    z0: &SpherePoint,
    w0: &SpherePoint,
    tol: &Tolerances,
) -> Result<usize> {
    if j >= ta.len() || tau.get(j).is_none_or(|t| *t >= tb.len()) || transitions.len() <= j {
        return Err(Error::Schema("sphere index out of range".into()));
    }
    ratmap::preimage_bound(&transitions[j], w0, z0, tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreimageVerification {
    pub predicted: usize,
    /// Counts per sample (`None` when probe points near `w0` disagree).
    pub empirical: Vec<Option<usize>>,
    /// First sample from which every count equals the prediction.
    pub threshold: usize,
    pub agree: bool,
}

/// Points at chordal distance about `r` from `p`.
fn ring(p: &SpherePoint, r: f64, m: usize) -> Vec<SpherePoint> {
    let v = p.stereographic();
    let helper = if v[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let cross = |a: [f64; 3], b: [f64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let unit = |a: [f64; 3]| {
        let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        [a[0] / n, a[1] / n, a[2] / n]
    };
    let u1 = unit(cross(v, helper));
    let u2 = cross(v, u1);
    // Chordal distance is half the Euclidean distance in R³.
    let s = 2.0 * r;
    (0..m)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / m as f64;
            let q = [0, 1, 2].map(|c| v[c] + s * (th.cos() * u1[c] + th.sin() * u2[c]));
            SpherePoint::from_stereographic(unit(q))
        })
        .collect()
}

/// Empirical check of the preimage-count formula: for each `t`, counts
/// roots of `h_t = B_t ∘ f_t^n ∘ A_t⁻¹` within chordal `radius` of `z0`
/// over `w0` and four probe points near it. The limit `φ` of `h_t` is
/// extrapolated from the samples (`ts` must tend to 0 or ∞ geometrically).
#[allow(clippy::too_many_arguments)]
pub fn preimage_count_verify(
    fam: &FamilySpec,
    iterate: usize,
    a: &[[TPoly; 2]; 2],
    b: &[[TPoly; 2]; 2],
    ts: &[GaussRat],
    z0: &SpherePoint,
    w0: &SpherePoint,
    radius: f64,
    tol: &Tolerances,
    exec: Exec,
) -> Result<PreimageVerification> {
    if ts.len() < 2 {
        return Err(Error::Schema("at least two parameters required".into()));
    }
    let hs: Vec<ProjectiveRatMap> = par::map_slice(exec, ts, |t| {
        let f = rescaling::sample_family_exact(fam, t)?.iterate(iterate, tol)?;
        let am = XMoebius::from_tpolys(a, t);
        let bm = XMoebius::from_tpolys(b, t);
        let h = rescaling::pre_compose_exact(&f, &am.inverse())?;
        rescaling::exact_to_float(&rescaling::post_compose_exact(&h, &bm)?)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let tv: Vec<f64> = ts.iter().map(|t| crate::scalar::Scalar::to_c64(t).norm()).collect();
    let eps: Vec<f64> = if tv[tv.len() - 1] < tv[0] {
        tv
    } else {
        tv.iter().map(|x| 1.0 / x).collect()
    };
    let phi = limits::map_limit(&eps, &hs, iterate, tol)?;
    let predicted = ratmap::preimage_bound(phi.best(), w0, z0, tol)?;
    let mut probes = vec![*w0];
    probes.extend(ring(w0, radius * 1e-2, 4));
    let empirical: Vec<Option<usize>> = par::map_slice(exec, &hs, |h| {
        let counts: Vec<usize> = probes
            .iter()
            .map(|w| {
                h.preimages_raw(w)
                    .map(|pre| pre.iter().filter(|p| p.chordal(z0) <= radius).count())
                    .unwrap_or(usize::MAX)
            })
            .collect();
        if counts.iter().all(|c| *c == counts[0] && *c != usize::MAX) {
            Some(counts[0])
        } else {
            None
        }
    });
    let mut threshold = empirical.len();
    for (i, c) in empirical.iter().enumerate().rev() {
        if *c == Some(predicted) {
            threshold = i;
        } else {
            break;
        }
    }
    if threshold + 2 > empirical.len() {
        return Err(Error::InconclusiveK);
    }
    Ok(PreimageVerification {
        predicted,
        empirical,
        threshold,
        agree: true,
    })
}
