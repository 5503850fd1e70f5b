//! File formats: JSON wall dumps, broken lines and fan pictures, CSV
//! invariant tables, and SVG drawings of diagrams.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use scatterlab_core::brokenlines::{BrokenLine, InvariantTable};
use scatterlab_core::geom::{param_on_line, IVec, Pt};
use scatterlab_core::scattering::{ScatteringDiagram, Wall};
use scatterlab_core::surface::FanPicture;
use scatterlab_core::{Mono, Rat, Series};
use serde_json::{json, Value};

/// Version tag of the fan picture document.
pub const FAN_PICTURE_VERSION: u64 = 1;

fn big(v: &impl ToString) -> Value {
    let s = v.to_string();
    match s.parse::<i64>() {
        Ok(n) => json!(n),
        Err(_) => json!(s),
    }
}

/// `[num, den]`; parts beyond `i64` are written as decimal strings.
pub fn rat_json(r: &Rat) -> Value {
    json!([big(r.numer()), big(r.denom())])
}

pub fn pt_json(p: &Pt) -> Value {
    json!([rat_json(&p.x), rat_json(&p.y)])
}

fn class_vec(m: &Mono, rank: usize) -> Vec<i32> {
    m.c[..rank].to_vec()
}

/// Terms of a series as `{c, x, y, t, s, h}` objects in monomial order.
pub fn series_json(s: &Series) -> Value {
    let terms: Vec<Value> = s
        .iter()
        .map(|(m, c)| json!({"c": rat_json(c), "x": m.a, "y": m.b, "t": m.d, "s": class_vec(m, s.rank()), "h": m.h}))
        .collect();
    Value::Array(terms)
}

/// One wall with its function in the z-form of the cell it starts in.
pub fn wall_json(w: &Wall, f: &FanPicture) -> Value {
    let z = w.z_function(f, w.first_cell(f));
    json!({
        "base": pt_json(&w.base),
        "dir": w.direction,
        "end": w.end.as_ref().map(rat_json),
        "slab": w.is_slab,
        "kink": w.kink,
        "birth": w.birth_order,
        "f": series_json(&z),
        "text": z.to_text(),
    })
}

fn wall_key(w: &Wall) -> (Pt, IVec, u32) {
    (w.base.clone(), w.direction, w.birth_order)
}

/// The whole diagram; slabs and walls sorted by base, direction and birth order.
pub fn diagram_json(d: &ScatteringDiagram) -> Value {
    let f = &d.surface;
    let mut slabs: Vec<&Wall> = d.slabs.iter().collect();
    let mut walls: Vec<&Wall> = d.walls.iter().collect();
    slabs.sort_by_key(|w| wall_key(w));
    walls.sort_by_key(|w| wall_key(w));
    json!({
        "surface": f.name,
        "order": d.order,
        "hbar_order": d.h_cut,
        "consistent": d.consistent,
        "slabs": slabs.iter().map(|w| wall_json(w, f)).collect::<Vec<_>>(),
        "walls": walls.iter().map(|w| wall_json(w, f)).collect::<Vec<_>>(),
    })
}

pub fn broken_line_json(l: &BrokenLine, rank: usize) -> Value {
    let segs: Vec<Value> = l
        .segments
        .iter()
        .map(|s| {
            json!({
                "start": pt_json(&s.start),
                "dir": s.direction,
                "mono": {"x": s.mono.a, "y": s.mono.b, "t": s.mono.d, "s": class_vec(&s.mono, rank)},
                "coeff": rat_json(&s.coeff),
                "q_coeff": series_json(&s.q_coeff),
            })
        })
        .collect();
    json!({"endpoint": pt_json(&l.endpoint), "charge": l.asymptotic_charge, "segments": segs})
}

pub fn broken_lines_json(lines: &[BrokenLine], rank: usize) -> Value {
    Value::Array(lines.iter().map(|l| broken_line_json(l, rank)).collect())
}

/// CSV with header `p,q,class,genus,R_trop,R`; cells are exact `num/den`.
pub fn table_csv(t: &InvariantTable) -> String {
    let mut out = String::from("p,q,class,genus,R_trop,R\n");
    for (k, v) in &t.entries {
        let class: Vec<String> = k.class[..t.rank].iter().map(|c| c.to_string()).collect();
        let r = v / &Rat::int(k.p);
        let _ = writeln!(out, "{},{},{},{},{},{}", k.p, k.q, class.join(" "), k.genus, v, r);
    }
    out
}

/// Fan picture document: the defining data plus derived vertices, kinks,
/// singularities and the periodicity map for one period.
pub fn fan_picture_json(f: &FanPicture) -> Value {
    let p = f.period();
    let per = f.periodicity();
    json!({
        "version": FAN_PICTURE_VERSION,
        "name": f.name,
        "fan_rays": f.fan_rays,
        "ray_classes": f.ray_classes,
        "class_names": f.class_names,
        "origin": f.origin,
        "s0": f.s0,
        "m_out": f.m_out,
        "vertices": (0..=p).map(|n| f.vertex(n)).collect::<Vec<_>>(),
        "kinks": f.vertex_kinks(),
        "slabs": (0..p).map(|n| json!({"from": f.vertex(n), "dir": f.edge_dir(n)})).collect::<Vec<_>>(),
        "singularities": (0..p).map(|n| {
            let s = f.singularity(n);
            json!({"position": pt_json(&s.position), "invariant_direction": s.invariant_direction, "slab": s.host_slab})
        }).collect::<Vec<_>>(),
        "periodicity": {"linear": per.linear, "translation": per.translation},
    })
}

fn ivec(v: &Value, what: &str) -> Result<IVec> {
    let a: Vec<i64> = serde_json::from_value(v.clone()).with_context(|| format!("{} must be an integer pair", what))?;
    if a.len() != 2 {
        bail!("{} must have two entries", what);
    }
    Ok([a[0], a[1]])
}

/// Reads a fan picture document. Only the defining fields are read; the
/// derived ones are recomputed. The picture must be Fano and asymptotically
/// cylindrical.
pub fn fan_picture_from_json(v: &Value) -> Result<FanPicture> {
    let version = v.get("version").and_then(Value::as_u64).ok_or_else(|| anyhow!("missing version"))?;
    if version != FAN_PICTURE_VERSION {
        bail!("unsupported fan picture version {}", version);
    }
    let field = |k: &str| v.get(k).ok_or_else(|| anyhow!("missing field {}", k));
    let rays: Vec<Value> = serde_json::from_value(field("fan_rays")?.clone())?;
    let fan_rays = rays.iter().map(|r| ivec(r, "fan ray")).collect::<Result<Vec<_>>>()?;
    let ray_classes: Vec<Vec<i32>> = serde_json::from_value(field("ray_classes")?.clone())?;
    let class_names: Vec<String> = serde_json::from_value(field("class_names")?.clone())?;
    if ray_classes.len() != fan_rays.len() || ray_classes.iter().any(|c| c.len() != class_names.len()) {
        bail!("ray classes do not match the rays and class names");
    }
    if class_names.is_empty() || class_names.len() > scatterlab_core::series::MAX_RANK {
        bail!("class rank must be between 1 and {}", scatterlab_core::series::MAX_RANK);
    }
    let f = FanPicture {
        name: field("name")?.as_str().unwrap_or("surface").to_string(),
        fan_rays,
        ray_classes,
        class_names,
        origin: ivec(field("origin")?, "origin")?,
        s0: field("s0")?.as_i64().ok_or_else(|| anyhow!("s0 must be an integer"))?,
        m_out: ivec(field("m_out")?, "m_out")?,
    };
    if !f.is_fano() {
        bail!("fan picture is not Fano");
    }
    if !f.is_asym_cyl() {
        bail!("fan picture is not asymptotically cylindrical with m_out = (0, 1)");
    }
    Ok(f)
}

/// Axis-aligned viewport `[x0, x1] x [y0, y1]` drawn at `scale` pixels per unit.
/// A chart point `(x, y)` maps to `((x - x0) * scale, (y1 - y) * scale)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Viewport {
    pub x0: Rat,
    pub y0: Rat,
    pub x1: Rat,
    pub y1: Rat,
    pub scale: i64,
}

impl Viewport {
    pub fn map(&self, p: &Pt) -> (Rat, Rat) {
        let s = Rat::int(self.scale);
        ((&p.x - &self.x0) * &s, (&self.y1 - &p.y) * &s)
    }

    fn contains(&self, p: &Pt) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Clips `a + s (b - a)`, `s` in `[lo, hi]` (`hi = None` for a ray), to the box.
    pub fn clip(&self, a: &Pt, dir: IVec, lo: &Rat, hi: Option<&Rat>) -> Option<(Pt, Pt)> {
        let mut s0 = lo.clone();
        let mut s1: Option<Rat> = hi.cloned();
        for (d, p, min, max) in [(dir[0], &a.x, &self.x0, &self.x1), (dir[1], &a.y, &self.y0, &self.y1)] {
            if d == 0 {
                if p < min || p > max {
                    return None;
                }
                continue;
            }
            let dr = Rat::int(d);
            let (ea, eb) = ((min - p) / dr.clone(), (max - p) / dr);
            let (enter, leave) = if d > 0 { (ea, eb) } else { (eb, ea) };
            if enter > s0 {
                s0 = enter;
            }
            s1 = Some(match s1 {
                Some(v) if v < leave => v,
                _ => leave,
            });
        }
        let s1 = s1?;
        if s0 > s1 {
            return None;
        }
        Some((a.offset(dir, &s0), a.offset(dir, &s1)))
    }
}

fn dec(r: &Rat) -> String {
    format!("{:.4}", r.to_f64())
}

fn exact(p: &Pt) -> String {
    format!("{},{}", p.x, p.y)
}

fn line(out: &mut String, vp: &Viewport, a: &Pt, b: &Pt, class: &str) {
    let (ax, ay) = vp.map(a);
    let (bx, by) = vp.map(b);
    let _ = writeln!(
        out,
        r#"<line class="{}" x1="{}" y1="{}" x2="{}" y2="{}" data-from="{}" data-to="{}"/>"#,
        class,
        dec(&ax),
        dec(&ay),
        dec(&bx),
        dec(&by),
        exact(a),
        exact(b)
    );
}

/// SVG drawing: walls as clipped rays, slabs bold, singularities as crosses,
/// and an optional broken-line overlay. Every `<line>` carries its exact
/// chart endpoints in `data-from`/`data-to`.
pub fn render_svg(d: &ScatteringDiagram, vp: &Viewport, lines: &[BrokenLine]) -> String {
    let f = &d.surface;
    let w = (&vp.x1 - &vp.x0) * Rat::int(vp.scale);
    let h = (&vp.y1 - &vp.y0) * Rat::int(vp.scale);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" data-viewport="{} {} {} {}" data-scale="{}">"#,
        dec(&w),
        dec(&h),
        vp.x0,
        vp.y0,
        vp.x1,
        vp.y1,
        vp.scale
    );
    out.push_str("<style>line{stroke:#333;stroke-width:1}.slab{stroke-width:3;stroke:#000}.sing{stroke:#c00}.broken{stroke:#080;stroke-width:1.5}</style>\n");
    let mut slabs: Vec<&Wall> = d.slabs.iter().collect();
    let mut walls: Vec<&Wall> = d.walls.iter().collect();
    slabs.sort_by_key(|w| wall_key(w));
    walls.sort_by_key(|w| wall_key(w));
    for (list, class) in [(&slabs, "slab"), (&walls, "wall")] {
        for wl in list.iter() {
            if let Some((a, b)) = vp.clip(&wl.base, wl.direction, &Rat::zero(), wl.end.as_ref()) {
                line(&mut out, vp, &a, &b, class);
            }
        }
    }
    let p = f.period();
    for n in -d.periods * p..(d.periods + 1) * p {
        let c = f.mid(n);
        if !vp.contains(&c) {
            continue;
        }
        let e = Rat::new(1, 12);
        let (cx, cy) = (c.x.clone(), c.y.clone());
        let a = Pt::new(&cx - &e, &cy - &e);
        let b = Pt::new(&cx + &e, &cy + &e);
        let a2 = Pt::new(&cx - &e, &cy + &e);
        let b2 = Pt::new(&cx + &e, &cy - &e);
        line(&mut out, vp, &a, &b, "sing");
        line(&mut out, vp, &a2, &b2, "sing");
    }
    for l in lines {
        let segs = &l.segments;
        for (i, s) in segs.iter().enumerate() {
            let piece = if i == 0 {
                // the first segment comes in from infinity
                let back = [-s.direction[0], -s.direction[1]];
                vp.clip(&s.start, back, &Rat::zero(), None).map(|(a, b)| (b, a))
            } else {
                let end = segs.get(i + 1).map_or(&l.endpoint, |n| &n.start);
                // after a cut the next start is in other coordinates; skip those
                match param_on_line(&s.start, s.direction, end) {
                    Some(t) if !t.is_negative() => vp.clip(&s.start, s.direction, &Rat::zero(), Some(&t)),
                    _ => None,
                }
            };
            if let Some((a, b)) = piece {
                line(&mut out, vp, &a, &b, "broken");
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Parses `num` or `num/den` cells of a CSV table row.
pub fn parse_rat(s: &str) -> Result<Rat> {
    s.trim().parse::<Rat>().map_err(|e| anyhow!("bad rational {:?}: {}", s, e))
}
