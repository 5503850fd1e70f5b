//! Golden verification suites run by `scatterlab verify`.
//!
//! Each suite recomputes reference results from scratch and compares them
//! with the values in [`crate::fixtures`] and a few hard-coded printed lists.

use std::cell::OnceCell;

use scatterlab_core::brokenlines::{
    extract_r, genus_table, theta_central, thetas_parallel, unbounded_thetas, verify_theta_identities, InvariantTable, TraceOptions,
};
use scatterlab_core::exec::Executor;
use scatterlab_core::geom::Pt;
use scatterlab_core::mirrormap::{
    blowup_convolution, ggr_check, gv_crosscheck, lm_operator_check, lm_winding_one, open_closed_maps, theorem_check, BlowupMode, BlowupTable,
};
use scatterlab_core::scattering::{complete_to_order, consistency_check, initial_structure, transport_path, ScatteringDiagram};
use scatterlab_core::surface::{blow_up, builtin_f1, builtin_p2, verify_worm, worm_matrices, FanPicture};
use scatterlab_core::{Mono, Rat, Series};
use serde_json::{json, Value};

use crate::fixtures;

/// One named comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), ok, detail: detail.into() }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(name: impl Into<String>, got: T, want: T) -> Check {
        let ok = got == want;
        let detail = if ok { format!("{:?}", got) } else { format!("got {:?}, want {:?}", got, want) };
        Check::new(name, ok, detail)
    }

    fn err(name: impl Into<String>, e: impl std::fmt::Display) -> Check {
        Check::new(name, false, format!("error: {}", e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "ok": self.ok(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "ok": c.ok, "detail": c.detail})).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("[{}] {} {}: {}\n", if c.ok { "PASS" } else { "FAIL" }, self.suite, c.name, c.detail));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    AppendixA,
    AppendixB,
    AppendixC,
    ThetaIdentities,
    MirrorMap,
    Blowup,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::MirrorMap, Suite::AppendixA, Suite::AppendixB, Suite::AppendixC, Suite::ThetaIdentities, Suite::Blowup];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::AppendixA => "appendix-a",
            Suite::AppendixB => "appendix-b",
            Suite::AppendixC => "appendix-c",
            Suite::ThetaIdentities => "theta-identities",
            Suite::MirrorMap => "mirror-map",
            Suite::Blowup => "blowup",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().find(|x| x.name() == s).map(|x| vec![*x])
    }
}

/// Printed open mirror map coefficients through `Q^8`.
pub const M_COEFFS: [i64; 9] = [1, -2, 5, -32, 286, -3038, 35870, -454880, 6073311];
/// Printed `Q(z)` through `z^6`.
pub const Q_OF_Z: [i64; 7] = [0, 1, -6, 63, -866, 13899, -246366];
/// Printed `z(Q)` through `Q^6`.
pub const Z_OF_Q: [i64; 7] = [0, 1, 6, 9, 56, -300, 3942];

/// Window for negative `x` powers in the replay and transport.
pub const X_WINDOW: (i32, i32) = (-40, 64);

/// Same terms, ignoring cuts and windows.
pub fn same_terms(a: &Series, b: &Series) -> bool {
    a.iter().eq(b.iter())
}

/// Diagrams and thetas shared between checks, built on first use.
pub struct Bench<'e, E: Executor> {
    exec: &'e E,
    p2_order9: OnceCell<Result<ScatteringDiagram, String>>,
    p2_order6: OnceCell<Result<ScatteringDiagram, String>>,
    thetas9: OnceCell<Result<Vec<Series>, String>>,
    thetas6: OnceCell<Result<Vec<Series>, String>>,
}

fn build<E: Executor>(f: &FanPicture, k: u32, h_cut: u32, exec: &E) -> Result<ScatteringDiagram, String> {
    complete_to_order(&initial_structure(f, h_cut), k, exec).map(|(d, _)| d).map_err(|e| e.to_string())
}

impl<'e, E: Executor> Bench<'e, E> {
    pub fn new(exec: &'e E) -> Self {
        Bench { exec, p2_order9: OnceCell::new(), p2_order6: OnceCell::new(), thetas9: OnceCell::new(), thetas6: OnceCell::new() }
    }

    pub fn exec(&self) -> &E {
        self.exec
    }

    pub fn p2(&self, k: u32) -> Result<&ScatteringDiagram, String> {
        let cell = match k {
            9 => &self.p2_order9,
            6 => &self.p2_order6,
            _ => return Err(format!("no cached diagram of order {}", k)),
        };
        cell.get_or_init(|| build(&builtin_p2(), k, 0, self.exec)).as_ref().map_err(|e| e.clone())
    }

    /// Unbounded-chamber `theta_0..=theta_qmax` for P^2 at order `k` (6 or 9),
    /// with `qmax = k - 1`.
    pub fn thetas(&self, k: u32) -> Result<&Vec<Series>, String> {
        let cell = match k {
            9 => &self.thetas9,
            6 => &self.thetas6,
            _ => return Err(format!("no cached thetas of order {}", k)),
        };
        cell.get_or_init(|| {
            let d = self.p2(k)?;
            unbounded_thetas(d, k as i64 - 1, &TraceOptions::new(k, 0), self.exec).map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| e.clone())
    }
}

pub fn run_suite<E: Executor>(suite: Suite, bench: &Bench<E>) -> SuiteReport {
    let checks = match suite {
        Suite::MirrorMap => mirror_map_checks(),
        Suite::AppendixA => appendix_a_checks(bench),
        Suite::AppendixB => appendix_b_checks(bench),
        Suite::AppendixC => appendix_c_checks(bench),
        Suite::ThetaIdentities => theta_identity_checks(bench),
        Suite::Blowup => blowup_checks(bench),
    };
    SuiteReport { suite: suite.name().to_string(), checks }
}

fn coeffs(s: &Series, n: usize) -> Vec<Rat> {
    (0..n as i32).map(|k| s.t_coeff(k)).collect()
}

fn ints(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|c| Rat::int(*c)).collect()
}

pub fn mirror_map_checks() -> Vec<Check> {
    let mut out = Vec::new();
    match open_closed_maps(8) {
        Ok(maps) => {
            out.push(Check::eq("M(Q) through Q^8", coeffs(&maps.m, 9), ints(&M_COEFFS)));
            out.push(Check::eq("Q(z) through z^6", coeffs(&maps.q_of_z, 7), ints(&Q_OF_Z)));
            out.push(Check::eq("z(Q) through Q^6", coeffs(&maps.z_of_q, 7), ints(&Z_OF_Q)));
        }
        Err(e) => out.push(Check::err("mirror maps", e)),
    }
    match lm_operator_check(10) {
        Ok(r) => {
            out.push(Check::new("closed operator on log z + F", r.closed.is_zero(), "through z^10"));
            out.push(Check::new("open-closed operators on log x - F/3", r.open_closed_1.is_zero() && r.open_closed_2.is_zero(), "through z^10"));
        }
        Err(e) => out.push(Check::err("operator residuals", e)),
    }
    match (lm_winding_one(8), open_closed_maps(8)) {
        (Ok(w), Ok(m)) => out.push(Check::eq("winding-one disk potential", coeffs(&w, 9), coeffs(&m.m, 9))),
        (Err(e), _) | (_, Err(e)) => out.push(Check::err("winding-one disk potential", e)),
    }
    out
}

/// Series of the crossing point of a straight path with each wall it meets,
/// read in the z-form of the cell at the crossing, classes forgotten.
pub fn walls_on_path(d: &ScatteringDiagram, a: &Pt, b: &Pt) -> Result<Vec<Series>, String> {
    let f = &d.surface;
    let dx = &b.x - &a.x;
    let dy = &b.y - &a.y;
    let mut out = Vec::new();
    for (s, i, _) in d.crossings(a, b, false).map_err(|e| e.to_string())? {
        let q = Pt::new(&a.x + &(&s * &dx), &a.y + &(&s * &dy));
        let cell = f.locate(&q).ok_or_else(|| format!("crossing {:?} not in a cell", q))?;
        out.push(d.walls[i].z_function(f, cell).forget_classes());
    }
    Ok(out)
}

pub fn appendix_a_checks<E: Executor>(bench: &Bench<E>) -> Vec<Check> {
    let mut out = Vec::new();
    let replay = match fixtures::replay(12, X_WINDOW.0, X_WINDOW.1) {
        Ok(r) => r,
        Err(e) => return vec![Check::err("replay", e)],
    };
    let want = Series::parse(fixtures::REPLAY_PURE_Y, 0, 12, 0).expect("printed series");
    out.push(Check::new("replay pure y part", same_terms(&replay.pure_y_part(), &want), replay.pure_y_part().to_text()));
    let low_x = replay.filter(|m, _| m.a != 0 && m.d < 11);
    out.push(Check::new("replay x terms start at t^11", low_x.is_zero() && !replay.touches_window(), low_x.to_text()));
    match theorem_check(&replay, 4) {
        Ok(r) => out.push(Check::new("replayed W / y = M(Q) through Q^4", r.ok(), format!("{:?}", r.first_mismatch()))),
        Err(e) => out.push(Check::err("replayed W / y", e)),
    }
    let d = match bench.p2(9) {
        Ok(d) => d,
        Err(e) => {
            out.push(Check::err("P2 diagram at order 9", e));
            return out;
        }
    };
    match consistency_check(d, bench.exec()) {
        Ok(r) => out.push(Check::new("P2 order 9 consistent", r.all_ok(), format!("{} joints, first failure {:?}", r.joints.len(), r.first_failure()))),
        Err(e) => out.push(Check::err("P2 order 9 consistent", e)),
    }
    let path = fixtures::reference_path();
    match walls_on_path(d, &path[0], &path[1]) {
        Ok(found) => {
            for i in fixtures::GENERATED_SUBSET {
                let f = fixtures::reference_wall(i, 9);
                let hit = found.iter().any(|g| same_terms(g, &f));
                out.push(Check::new(format!("generated wall {}", fixtures::REFERENCE_WALLS[i].0), hit, "on the reference path"));
            }
        }
        Err(e) => out.push(Check::err("walls on the reference path", e)),
    }
    let w0 = fixtures::start_potential(9).with_window(X_WINDOW.0, X_WINDOW.1);
    match transport_path(&w0, &path, d) {
        Ok(w) => {
            let want9 = replay.truncate(9, 0);
            out.push(Check::new("transport equals replay through t^9", same_terms(&w, &want9), w.to_text()));
            match theorem_check(&w, 3) {
                Ok(r) => out.push(Check::new("generated W / y = M(Q) through Q^3", r.ok(), format!("{:?}", r.first_mismatch()))),
                Err(e) => out.push(Check::err("generated W / y", e)),
            }
        }
        Err(e) => out.push(Check::err("transport", e)),
    }
    out
}

/// Orders at which each genus-0 count is read.
fn genus0_order(p: i64, q: i64) -> u32 {
    if p + q <= 6 {
        6
    } else {
        9
    }
}

pub fn appendix_b_checks<E: Executor>(bench: &Bench<E>) -> Vec<Check> {
    let mut out = Vec::new();
    for (p, q, n, dd) in fixtures::GENUS0_COUNTS {
        let k = genus0_order(p, q);
        let name = format!("R^0_{},{} at order {}", p, q, k);
        match bench.thetas(k) {
            Ok(th) => match extract_r(&th[q as usize], p, q) {
                Ok((_, r)) => out.push(Check::eq(name, r, Rat::new(n, dd))),
                Err(e) => out.push(Check::err(name, e)),
            },
            Err(e) => out.push(Check::err(name, e)),
        }
    }
    // rows against the printed tables and closed forms, errata applied
    for row in fixtures::genus_rows() {
        let name = format!("genus expansion R_{},{}", row.p, row.q);
        match genus_table(&row.curves, row.p, 8) {
            Ok(got) => {
                let closed: Vec<Rat> = (0..5).map(|g| fixtures::corrected_closed_form(row.p, row.q, g).expect("closed form")).collect();
                let table = row.corrected();
                let fixed = fixtures::ERRATA.iter().filter(|e| e.0 == row.p && e.1 == row.q).count();
                let ok = got == closed && got == table;
                let detail = if ok { format!("{:?}, {} errata applied", got, fixed) } else { format!("got {:?}, table {:?}, closed form {:?}", got, table, closed) };
                out.push(Check::new(name, ok, detail));
            }
            Err(e) => out.push(Check::err(name, e)),
        }
    }
    out.push(central_theta2_check(bench));
    out
}

/// `theta_2` in the central cell with `h` through `h^4`.
pub fn central_theta2<E: Executor>(exec: &E) -> Result<Series, String> {
    let d = build(&builtin_p2(), 3, 4, exec)?;
    theta_central(&d, 2, &TraceOptions::new(3, 4), exec).map_err(|e| e.to_string())
}

fn central_theta2_check<E: Executor>(bench: &Bench<E>) -> Check {
    let name = "central q-refined theta_2";
    match central_theta2(bench.exec()) {
        Ok(th) => {
            let want = Series::parse(fixtures::CENTRAL_THETA2, 0, 3, 4).expect("printed series");
            let got = th.forget_classes();
            Check::new(name, same_terms(&got, &want), got.to_text())
        }
        Err(e) => Check::err(name, e),
    }
}

/// Genus-0 and genus-1 invariants of `dL - C` on the blow-up, `d = 1, 2`:
/// genus 0 from broken lines through the one-point correspondence,
/// genus 1 from the local Gopakumar-Vafa invariants.
pub fn appendix_c_checks<E: Executor>(bench: &Bench<E>) -> Vec<Check> {
    let mut out = Vec::new();
    let th = match bench.thetas(6) {
        Ok(t) => t,
        Err(e) => return vec![Check::err("thetas", e)],
    };
    let want_r1 = [Rat::new(-1, 3), Rat::new(-575, 24)];
    let want_point = [Rat::new(-1, 2), Rat::int(-25)];
    for (i, (d, n0, n1)) in fixtures::LOCAL_GV.iter().enumerate() {
        let e = 3 * d - 1;
        let gv = gv_crosscheck(&Rat::int(*n0), &Rat::int(*n1), *d);
        out.push(Check::eq(format!("R^1_{} of dL - C, d = {}", e, d), gv.r_genus1.clone(), want_r1[i].clone()));
        let r0 = match extract_r(&th[e as usize], 1, e) {
            Ok((_, r)) => r,
            Err(err) => {
                out.push(Check::err("genus-0 count", err));
                continue;
            }
        };
        out.push(Check::new(format!("GGR relation d = {}", d), ggr_check(&r0, &Rat::int(*n0), e), format!("R = {}, n = {}", r0, n0)));
        let mut table = BlowupTable::default();
        table.blown_up.insert(0, r0);
        table.blown_up.insert(1, gv.r_genus1);
        match blowup_convolution(&table, BlowupMode::Cor710 { genus: 1 }) {
            Ok(r) => {
                out.push(Check::eq(format!("R^1_1,{} of P2", e), r.clone(), want_point[i].clone()));
                let row = fixtures::genus_rows().into_iter().find(|x| x.p == 1 && x.q == e).expect("row");
                let tab = genus_table(&row.curves, 1, 2).map(|v| v[1].clone());
                out.push(Check::new(format!("R^1_1,{} agrees with the curve types", e), tab.as_ref() == Ok(&r), format!("{:?}", tab)));
            }
            Err(err) => out.push(Check::err("blow-up convolution", err)),
        }
    }
    out
}

pub fn theta_identity_checks<E: Executor>(bench: &Bench<E>) -> Vec<Check> {
    let mut out = Vec::new();
    for k in [6u32, 9] {
        let th = match bench.thetas(k) {
            Ok(t) => t,
            Err(e) => {
                out.push(Check::err(format!("thetas at order {}", k), e));
                continue;
            }
        };
        let rep = verify_theta_identities(th, 1, k);
        let n = rep.checks.len();
        out.push(Check::new(format!("theta identities at order {}", k), rep.all_ok(), format!("{} checks, first failure {:?}", n, rep.first_failure())));
        out.push(Check::new(format!("thetas parallel at order {}", k), thetas_parallel(th), "pure y"));
        let table = InvariantTable::from_thetas(th, 1);
        let bad: Vec<String> = table
            .entries
            .iter()
            .filter(|(key, v)| !v.is_integer() || (gcd(key.p, key.q) == 1 && !v.divisible_by(key.p * key.q)))
            .map(|(key, v)| format!("({},{})={}", key.p, key.q, v))
            .collect();
        out.push(Check::new(format!("integrality at order {}", k), bad.is_empty(), bad.join(" ")));
    }
    if let Ok(th) = bench.thetas(6) {
        let t = InvariantTable::from_thetas(th, 1);
        let lhs = t.trop_total(2, 4, 0) / Rat::int(2) * Rat::int(4);
        let rhs = t.trop_total(4, 2, 0) / Rat::int(4) * Rat::int(16);
        out.push(Check::eq("p^2 R_p,q = q^2 R_q,p for (2,4)", lhs, rhs));
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    scatterlab_core::geom::gcd(a, b)
}

/// Kinks after blowing up each corner of P^2, the worm matrices, and the
/// blown-up diagram at order 3.
pub fn blowup_checks<E: Executor>(bench: &Bench<E>) -> Vec<Check> {
    let mut out = Vec::new();
    let p2 = builtin_p2();
    for cell in 0..3 {
        match blow_up(&p2, cell) {
            Ok((f, _)) => out.push(Check::eq(format!("kinks after blowing up corner {}", cell), f.vertex_kinks(), vec![1, 2, 3, 2])),
            Err(e) => out.push(Check::err("blow-up", e)),
        }
    }
    out.push(Check::new("worm matrices", verify_worm(&worm_matrices()), "composition identity"));
    let f1 = builtin_f1();
    match build(&f1, 3, 0, bench.exec()) {
        Ok(d) => {
            match consistency_check(&d, bench.exec()) {
                Ok(r) => out.push(Check::new("F1 order 3 consistent", r.all_ok(), format!("first failure {:?}", r.first_failure()))),
                Err(e) => out.push(Check::err("F1 order 3 consistent", e)),
            }
            out.push(exceptional_wall_check(&d));
        }
        Err(e) => out.push(Check::err("F1 order 3", e)),
    }
    out
}

/// The function on the unbounded wall along the exceptional ray.
pub fn exceptional_wall(d: &ScatteringDiagram) -> Option<Series> {
    let f = &d.surface;
    let n = (0..f.period()).find(|n| {
        let c = f.ray_class(*n);
        c.iter().enumerate().all(|(i, v)| *v == if i + 1 == c.len() { 1 } else { 0 })
    })?;
    let base = f.vertex_pt(n);
    d.walls.iter().find(|w| w.base == base && w.direction == f.m_out && w.end.is_none()).map(|w| w.z_function(f, w.first_cell(f)))
}

fn exceptional_wall_check(d: &ScatteringDiagram) -> Check {
    let name = "exceptional wall function";
    let rank = d.surface.picard_rank();
    let mut c = vec![0; rank];
    c[rank - 1] = 1;
    // upward walls carry the downward exponent in this chart
    let want = Series::from_terms(rank, 3, 0, [(Rat::one(), Mono::ONE), (Rat::one(), Mono::xyt(0, -1, 1).with_class(&c))]);
    match exceptional_wall(d) {
        Some(s) => Check::new(name, same_terms(&s, &want), s.to_text()),
        None => Check::new(name, false, "no wall on the exceptional ray"),
    }
}
