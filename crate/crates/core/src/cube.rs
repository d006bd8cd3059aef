use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational, RationalJson};

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]` with rational corners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cube {
    lo: Vec<Rational>,
    hi: Vec<Rational>,
}

impl Cube {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::InvalidCube("dimension must be at least 1".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::InvalidCube(format!(
                "lo has {} entries but hi has {}",
                lo.len(),
                hi.len()
            )));
        }
        if let Some(i) = (0..lo.len()).find(|&i| lo[i] >= hi[i]) {
            return Err(Error::InvalidCube(format!(
                "edge {} is empty or degenerate: [{}, {}]",
                i + 1,
                rational::format(&lo[i]),
                rational::format(&hi[i])
            )));
        }
        Ok(Cube { lo, hi })
    }

    /// `[0, 1]^n`.
    pub fn unit(n: usize) -> Self {
        Cube::new(vec![rational::int(0); n], vec![rational::int(1); n])
            .expect("unit cube is valid")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[Rational] {
        &self.lo
    }

    pub fn hi(&self) -> &[Rational] {
        &self.hi
    }

    pub fn length(&self, axis: usize) -> Rational {
        &self.hi[axis] - &self.lo[axis]
    }

    pub fn max_length(&self) -> Rational {
        (0..self.dim())
            .map(|i| self.length(i))
            .max()
            .expect("cube has at least one axis")
    }

    pub fn midpoint(&self, axis: usize) -> Rational {
        (&self.lo[axis] + &self.hi[axis]) / rational::int(2)
    }

    pub fn center(&self) -> Vec<Rational> {
        (0..self.dim()).map(|i| self.midpoint(i)).collect()
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .enumerate()
                .all(|(i, x)| &self.lo[i] <= x && x <= &self.hi[i])
    }

    /// The facet cube obtained by dropping `axis`.
    pub fn drop_axis(&self, axis: usize) -> Option<Cube> {
        if self.dim() <= 1 {
            return None;
        }
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo.remove(axis);
        hi.remove(axis);
        Some(Cube { lo, hi })
    }

    /// Splits every axis in half, yielding `2^n` sub-cubes.
    pub fn bisect(&self) -> Vec<Cube> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                let mut lo = Vec::with_capacity(n);
                let mut hi = Vec::with_capacity(n);
                for i in 0..n {
                    let mid = self.midpoint(i);
                    if mask >> i & 1 == 0 {
                        lo.push(self.lo[i].clone());
                        hi.push(mid);
                    } else {
                        lo.push(mid);
                        hi.push(self.hi[i].clone());
                    }
                }
                Cube { lo, hi }
            })
            .collect()
    }

    pub fn lo_f64(&self) -> Vec<f64> {
        self.lo.iter().map(rational::to_f64).collect()
    }

    pub fn hi_f64(&self) -> Vec<f64> {
        self.hi.iter().map(rational::to_f64).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeJson {
    pub lo: Vec<RationalJson>,
    pub hi: Vec<RationalJson>,
}

impl From<&Cube> for CubeJson {
    fn from(cube: &Cube) -> Self {
        CubeJson {
            lo: cube.lo.iter().map(RationalJson::from).collect(),
            hi: cube.hi.iter().map(RationalJson::from).collect(),
        }
    }
}

impl TryFrom<&CubeJson> for Cube {
    type Error = Error;

    fn try_from(value: &CubeJson) -> Result<Cube> {
        let lo = value.lo.iter().map(Rational::try_from).collect::<Result<_>>()?;
        let hi = value.hi.iter().map(Rational::try_from).collect::<Result<_>>()?;
        Cube::new(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn rejects_degenerate_edges() {
        assert!(Cube::new(vec![int(0)], vec![int(0)]).is_err());
        assert!(Cube::new(vec![int(1)], vec![int(0)]).is_err());
        assert!(Cube::new(vec![], vec![]).is_err());
    }

    #[test]
    fn midpoints_and_faces() {
        let c = Cube::new(vec![int(0), int(1)], vec![int(2), int(3)]).unwrap();
        assert_eq!(c.midpoint(1), int(2));
        assert_eq!(c.drop_axis(1).unwrap().hi(), &[int(2)]);
        assert_eq!(c.bisect().len(), 4);
        assert!(c.contains(&[rat(1, 2), int(3)]));
        assert!(!c.contains(&[int(3), int(2)]));
    }
}
