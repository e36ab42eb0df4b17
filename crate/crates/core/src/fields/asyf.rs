//! ASYF snapshot format (little-endian throughout).
//!
//! ```text
//! "ASYF"  u32 version  u32 component_count
//! per component:
//!   u32 m  u32 n  u32 N  i32 ell  f64 gamma0
//!   u32 term_count, per term: u32 k  u32 l  u32 M  (2M+1) × (f64 re, f64 im)
//!   f64 L  u32 nx  u32 cutoff_kind  f64 p1  f64 p2  u32 m_max  u32 k_max  u8 complex
//!   nx² samples, row-major (x fastest): f64 re, or (f64 re, f64 im) if complex
//! ```
//! cutoff_kind 0 is the exp-bump (p1 = r_lo, p2 = r_hi); 1 is the gamma
//! profile (p1 = order, p2 = scale).

use super::{AsymptoticField, AsymptoticPart, AsymptoticTerm, Cutoff, GridSpec, RemainderGrid, SpaceParams};
use crate::angular::AngularFunction;
use num_complex::Complex64 as C64;
use std::io::{self, Read, Write};
use std::sync::Arc;

pub const MAGIC: &[u8; 4] = b"ASYF";
pub const VERSION: u32 = 1;

fn wu32(w: &mut impl Write, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}
fn wf64(w: &mut impl Write, v: f64) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}
fn ru32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
fn ri32(r: &mut impl Read) -> io::Result<i32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(i32::from_le_bytes(b))
}
fn rf64(r: &mut impl Read) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn write_fields(w: &mut impl Write, fields: &[&AsymptoticField]) -> io::Result<()> {
    w.write_all(MAGIC)?;
    wu32(w, VERSION)?;
    wu32(w, fields.len() as u32)?;
    for f in fields {
        write_component(w, f)?;
    }
    Ok(())
}

fn write_component(w: &mut impl Write, f: &AsymptoticField) -> io::Result<()> {
    let p = f.params;
    wu32(w, p.m)?;
    wu32(w, p.n)?;
    wu32(w, p.big_n)?;
    w.write_all(&p.ell.to_le_bytes())?;
    wf64(w, p.gamma0)?;
    let terms = f.terms();
    wu32(w, terms.len() as u32)?;
    for (k, l, a) in terms.iter() {
        wu32(w, k)?;
        wu32(w, l)?;
        wu32(w, a.cutoff() as u32)?;
        for c in a.modes() {
            wf64(w, c.re)?;
            wf64(w, c.im)?;
        }
    }
    let spec = f.grid().spec;
    wf64(w, spec.half_width)?;
    wu32(w, spec.nx as u32)?;
    let (kind, p1, p2) = match spec.cutoff {
        Cutoff::Bump { r_lo, r_hi } => (0u32, r_lo, r_hi),
        Cutoff::Gamma { order, scale } => (1u32, order as f64, scale),
    };
    wu32(w, kind)?;
    wf64(w, p1)?;
    wf64(w, p2)?;
    wu32(w, spec.m_max as u32)?;
    wu32(w, spec.k_max)?;
    let vals = f.rem().values();
    let complex = vals.iter().any(|v| v.im != 0.0);
    w.write_all(&[complex as u8])?;
    for v in vals {
        wf64(w, v.re)?;
        if complex {
            wf64(w, v.im)?;
        }
    }
    Ok(())
}

pub fn read_fields(r: &mut impl Read) -> io::Result<Vec<AsymptoticField>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not an ASYF file"));
    }
    let version = ru32(r)?;
    if version != VERSION {
        return Err(bad(&format!("unsupported ASYF version {version}")));
    }
    let count = ru32(r)?;
    let mut grids: Vec<Arc<super::Grid>> = Vec::new();
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let params = SpaceParams { m: ru32(r)?, n: ru32(r)?, big_n: ru32(r)?, ell: ri32(r)?, gamma0: rf64(r)? };
        let nterms = ru32(r)?;
        let mut terms = AsymptoticPart::new();
        for _ in 0..nterms {
            let k = ru32(r)?;
            let l = ru32(r)?;
            let m = ru32(r)? as usize;
            if m > 1 << 16 {
                return Err(bad("mode count out of range"));
            }
            let mut modes = Vec::with_capacity(2 * m + 1);
            for _ in 0..2 * m + 1 {
                let re = rf64(r)?;
                let im = rf64(r)?;
                modes.push(C64::new(re, im));
            }
            terms.push(AsymptoticTerm::new(k, l, AngularFunction::from_modes(modes)));
        }
        let half_width = rf64(r)?;
        let nx = ru32(r)? as usize;
        if !nx.is_power_of_two() || !(8..=1 << 14).contains(&nx) {
            return Err(bad("grid size must be a power of two"));
        }
        let kind = ru32(r)?;
        let p1 = rf64(r)?;
        let p2 = rf64(r)?;
        let cutoff = match kind {
            0 => Cutoff::Bump { r_lo: p1, r_hi: p2 },
            1 => Cutoff::Gamma { order: p1 as u32, scale: p2 },
            _ => return Err(bad("unknown cutoff kind")),
        };
        let m_max = ru32(r)? as usize;
        let k_max = ru32(r)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        let spec = GridSpec { half_width, nx, cutoff, m_max, k_max };
        let grid = match grids.iter().find(|g| g.spec == spec) {
            Some(g) => g.clone(),
            None => {
                let g = spec.build();
                grids.push(g.clone());
                g
            }
        };
        let mut vals = Vec::with_capacity(nx * nx);
        for _ in 0..nx * nx {
            let re = rf64(r)?;
            let im = if flag[0] == 1 { rf64(r)? } else { 0.0 };
            vals.push(C64::new(re, im));
        }
        out.push(AsymptoticField::new(params, terms, RemainderGrid::new(grid, vals)));
    }
    Ok(out)
}
