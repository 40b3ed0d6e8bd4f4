//! Self-describing little-endian binary container for field snapshots.
//!
//! Layout: magic `HAMSNAP\0`, `u32` version, `u32` dim, `u32` bc
//! (0 periodic, 1 Dirichlet), then per axis `f64` lower, `f64` upper,
//! `u64` points; `f64` time; `u32` array count; each array is a `u16` name
//! length, UTF-8 name, `u32` location (0 node, 1 + j edge along axis j),
//! `u64` length and the `f64` values in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use crate::dynamics::State;
use crate::error::{Error, Result};
use crate::fields::{FullState, HiddenPair, ReducedState};
use crate::grid::{Boundary, Grid, Location, ScalarField, VectorField, MAX_DIM};
use crate::scalar::Real;

pub const MAGIC: [u8; 8] = *b"HAMSNAP\0";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedArray<T> {
    pub name: String,
    pub loc: Location,
    pub values: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub grid: Grid<T>,
    pub time: T,
    pub arrays: Vec<NamedArray<T>>,
}

const FAMILIES: [&str; 4] = ["P", "Q", "pi", "eta"];

impl<T: Real> Snapshot<T> {
    /// Arrays `p, q` and, for full states, `P1.., Q1.., pi1.., eta1..`; `V` if given.
    pub fn from_state(state: &State<T>, time: T, potential: Option<&ScalarField<T>>) -> Self {
        let grid = state.grid().clone();
        let mut arrays = Vec::new();
        let mut push = |name: String, f: &ScalarField<T>| {
            arrays.push(NamedArray {
                name,
                loc: f.loc(),
                values: f.values().to_vec(),
            })
        };
        match state {
            State::Reduced(r) => {
                push("p".into(), &r.p);
                push("q".into(), &r.q);
            }
            State::Full(f) => {
                push("p".into(), &f.p);
                push("q".into(), &f.q);
                let fams = [&f.first.momentum, &f.first.coordinate, &f.second.momentum, &f.second.coordinate];
                for (name, v) in FAMILIES.iter().zip(fams) {
                    for (j, c) in v.components().iter().enumerate() {
                        push(format!("{name}{}", j + 1), c);
                    }
                }
            }
        }
        if let Some(v) = potential {
            push("V".into(), v);
        }
        Snapshot { grid, time, arrays }
    }

    pub fn array(&self, name: &str) -> Option<&NamedArray<T>> {
        self.arrays.iter().find(|a| a.name == name)
    }

    fn field(&self, name: &str) -> Result<ScalarField<T>> {
        let a = self
            .array(name)
            .ok_or_else(|| Error::Snapshot(format!("missing array \"{name}\"")))?;
        ScalarField::from_values(&self.grid, a.loc, a.values.clone())
    }

    pub fn potential(&self) -> Result<Option<ScalarField<T>>> {
        self.array("V").map(|_| self.field("V")).transpose()
    }

    /// A full state when hidden arrays are present, otherwise a reduced state.
    pub fn to_state(&self) -> Result<State<T>> {
        let p = self.field("p")?;
        let q = self.field("q")?;
        if self.array("P1").is_none() {
            return Ok(State::Reduced(ReducedState::new(p, q)?));
        }
        let mut fams = Vec::with_capacity(4);
        for name in FAMILIES {
            let comps = (0..self.grid.dim())
                .map(|j| self.field(&format!("{name}{}", j + 1)))
                .collect::<Result<Vec<_>>>()?;
            fams.push(VectorField::from_components(&self.grid, comps)?);
        }
        let mut it = fams.into_iter();
        let mut next = || it.next().expect("four families");
        Ok(State::Full(FullState {
            p,
            q,
            first: HiddenPair {
                momentum: next(),
                coordinate: next(),
            },
            second: HiddenPair {
                momentum: next(),
                coordinate: next(),
            },
        }))
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        let g = &self.grid;
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(g.dim() as u32).to_le_bytes())?;
        let bc: u32 = match g.bc() {
            Boundary::Periodic => 0,
            Boundary::Dirichlet => 1,
        };
        w.write_all(&bc.to_le_bytes())?;
        for j in 0..g.dim() {
            let (a, b) = g.extent(j);
            w.write_all(&a.as_f64().to_le_bytes())?;
            w.write_all(&b.as_f64().to_le_bytes())?;
            w.write_all(&(g.points()[j] as u64).to_le_bytes())?;
        }
        w.write_all(&self.time.as_f64().to_le_bytes())?;
        w.write_all(&(self.arrays.len() as u32).to_le_bytes())?;
        for a in &self.arrays {
            let name = a.name.as_bytes();
            w.write_all(&(name.len() as u16).to_le_bytes())?;
            w.write_all(name)?;
            let loc: u32 = match a.loc {
                Location::Node => 0,
                Location::Edge(j) => 1 + j as u32,
            };
            w.write_all(&loc.to_le_bytes())?;
            w.write_all(&(a.values.len() as u64).to_le_bytes())?;
            let mut buf = Vec::with_capacity(8 * a.values.len());
            for x in &a.values {
                buf.extend_from_slice(&x.as_f64().to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Snapshot("bad magic bytes".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let dim = r.u32()? as usize;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Snapshot(format!("bad dimension {dim}")));
        }
        let bc = match r.u32()? {
            0 => Boundary::Periodic,
            1 => Boundary::Dirichlet,
            other => return Err(Error::Snapshot(format!("bad boundary code {other}"))),
        };
        let mut extents = Vec::with_capacity(dim);
        let mut points = Vec::with_capacity(dim);
        for _ in 0..dim {
            extents.push((T::lit(r.f64()?), T::lit(r.f64()?)));
            points.push(r.u64()? as usize);
        }
        let grid = Grid::new(&extents, &points, bc)?;
        let time = T::lit(r.f64()?);
        let count = r.u32()? as usize;
        let mut arrays = Vec::with_capacity(count.min(64));
        for _ in 0..count {
            let len = r.u16()? as usize;
            let name = String::from_utf8(r.take(len)?.to_vec())
                .map_err(|_| Error::Snapshot("array name is not UTF-8".into()))?;
            let loc = match r.u32()? {
                0 => Location::Node,
                j if (j as usize) <= dim => Location::Edge(j as usize - 1),
                other => return Err(Error::Snapshot(format!("bad location code {other}"))),
            };
            let n = r.u64()? as usize;
            if n != grid.len(loc) {
                return Err(Error::Snapshot(format!(
                    "array \"{name}\" has {n} values, grid expects {}",
                    grid.len(loc)
                )));
            }
            let raw = r.take(n.checked_mul(8).ok_or_else(|| Error::Snapshot("array too large".into()))?)?;
            let values = raw
                .chunks_exact(8)
                .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
                .collect();
            arrays.push(NamedArray { name, loc, values });
        }
        if r.pos != bytes.len() {
            return Err(Error::Snapshot(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Snapshot { grid, time, arrays })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Snapshot("truncated snapshot".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{adiabatic_lift, Mass};

    fn reduced(g: &Grid<f64>) -> ReducedState<f64> {
        ReducedState::new(
            ScalarField::from_fn(g, |x| (x[0] * 3.1).sin() + x.get(1).copied().unwrap_or(0.0)),
            ScalarField::from_fn(g, |x| 1.0 / 3.0 + x[0] * x[0]),
        )
        .unwrap()
    }

    #[test]
    fn reduced_round_trip_is_bit_exact() {
        let g = Grid::line(-1.0_f64, 2.0, 17, Boundary::Dirichlet).unwrap();
        let v = ScalarField::from_fn(&g, |x| x[0].exp());
        let s = Snapshot::from_state(&State::Reduced(reduced(&g)), 0.125, Some(&v));
        let bytes = s.to_bytes();
        let back = Snapshot::<f64>::from_bytes(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.potential().unwrap().unwrap(), v);
        assert_eq!(back.to_state().unwrap(), State::Reduced(reduced(&g)));
    }

    #[test]
    fn full_round_trip_2d() {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 2.0)], &[5, 4], Boundary::Periodic).unwrap();
        let f = adiabatic_lift(&reduced(&g), Mass::new(3.0).unwrap());
        let state = State::Full(f);
        let s = Snapshot::from_state(&state, 1.0, None);
        let names: Vec<&str> = s.arrays.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["p", "q", "P1", "P2", "Q1", "Q2", "pi1", "pi2", "eta1", "eta2"]);
        let back = Snapshot::<f64>::from_bytes(&s.to_bytes()).unwrap();
        assert_eq!(back.to_state().unwrap(), state);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let g = Grid::line(0.0, 1.0, 4, Boundary::Periodic).unwrap();
        let bytes = Snapshot::from_state(&State::Reduced(reduced(&g)), 0.0, None).to_bytes();
        assert!(Snapshot::<f64>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Snapshot::<f64>::from_bytes(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(Snapshot::<f64>::from_bytes(&long).is_err());
    }
}
