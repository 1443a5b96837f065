//! H-type algebras n = v ⊕ z and the nilpotent groups N.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Complex,
    Quaternionic,
}

/// Square integer matrix, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub dim: usize,
    pub entries: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(dim: usize) -> Self {
        IntMatrix { dim, entries: vec![0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) as f64 * x[j]).sum())
            .collect()
    }

    fn transpose_times(&self, other: &IntMatrix) -> IntMatrix {
        let d = self.dim;
        let mut out = IntMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let s = (0..d).map(|k| self.get(k, i) * other.get(k, j)).sum();
                out.set(i, j, s);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HTypeAlgebra {
    m_v: usize,
    m_z: usize,
    j_maps: Vec<IntMatrix>,
    family: Family,
}

/// Element (v, z) of N.
#[derive(Debug, Clone, PartialEq)]
pub struct NPoint {
    pub v: Vec<f64>,
    pub z: Vec<f64>,
}

impl NPoint {
    pub fn new(v: Vec<f64>, z: Vec<f64>) -> Self {
        NPoint { v, z }
    }

    pub fn identity(m_v: usize, m_z: usize) -> Self {
        NPoint { v: vec![0.0; m_v], z: vec![0.0; m_z] }
    }
}

// left multiplication by i, j, k on (a, b, c, d) = a + bi + cj + dk
const QUAT_LEFT: [[[i64; 4]; 4]; 3] = [
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
    [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
    [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]],
];

impl HTypeAlgebra {
    /// v = C^k with J the complex structure, z = R.
    pub fn complex_heisenberg(k: usize) -> Result<Self> {
        if k == 0 {
            return invalid("complex Heisenberg algebra needs k >= 1");
        }
        let mut j = IntMatrix::zeros(2 * k);
        for b in 0..k {
            j.set(2 * b, 2 * b + 1, -1);
            j.set(2 * b + 1, 2 * b, 1);
        }
        Ok(HTypeAlgebra { m_v: 2 * k, m_z: 1, j_maps: vec![j], family: Family::Complex })
    }

    /// v = H^k, z spanned by the first m_z imaginary units, J_z v = z·v.
    pub fn quaternionic(k: usize, m_z: usize) -> Result<Self> {
        if k == 0 {
            return invalid("quaternionic algebra needs k >= 1");
        }
        if !(1..=3).contains(&m_z) {
            return invalid(format!("quaternionic algebra needs m_z in {{1,2,3}}, got {m_z}"));
        }
        let j_maps = QUAT_LEFT[..m_z]
            .iter()
            .map(|block| {
                let mut j = IntMatrix::zeros(4 * k);
                for b in 0..k {
                    for r in 0..4 {
                        for c in 0..4 {
                            j.set(4 * b + r, 4 * b + c, block[r][c]);
                        }
                    }
                }
                j
            })
            .collect();
        Ok(HTypeAlgebra { m_v: 4 * k, m_z, j_maps, family: Family::Quaternionic })
    }

    /// Raw constructor; the result is not checked, see [`HTypeAlgebra::verify`].
    pub fn from_parts(family: Family, j_maps: Vec<IntMatrix>) -> Result<Self> {
        let Some(first) = j_maps.first() else {
            return invalid("at least one J-map is required");
        };
        let m_v = first.dim;
        if j_maps.iter().any(|j| j.dim != m_v || j.entries.len() != m_v * m_v) {
            return invalid("J-maps must share one square dimension");
        }
        Ok(HTypeAlgebra { m_v, m_z: j_maps.len(), j_maps, family })
    }

    pub fn m_v(&self) -> usize {
        self.m_v
    }

    pub fn m_z(&self) -> usize {
        self.m_z
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn j_maps(&self) -> &[IntMatrix] {
        &self.j_maps
    }

    /// 2Q = m_v + 2 m_z.
    pub fn two_q(&self) -> usize {
        self.m_v + 2 * self.m_z
    }

    pub fn q(&self) -> f64 {
        self.two_q() as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.m_v + self.m_z + 1
    }

    /// Exact check of J_αᵀJ_β + J_βᵀJ_α = 2δ_αβ I and skew-symmetry.
    pub fn verify(&self) -> bool {
        let d = self.m_v;
        for j in &self.j_maps {
            for r in 0..d {
                for c in 0..d {
                    if j.get(r, c) != -j.get(c, r) {
                        return false;
                    }
                }
            }
        }
        let two_id = {
            let mut m = IntMatrix::identity(d);
            m.entries.iter_mut().for_each(|e| *e *= 2);
            m
        };
        for (a, ja) in self.j_maps.iter().enumerate() {
            for (b, jb) in self.j_maps.iter().enumerate() {
                let mut s = ja.transpose_times(jb);
                let t = jb.transpose_times(ja);
                s.entries.iter_mut().zip(&t.entries).for_each(|(x, y)| *x += y);
                let want = if a == b { two_id.clone() } else { IntMatrix::zeros(d) };
                if s != want {
                    return false;
                }
            }
        }
        true
    }

    /// J_z v = Σ_α z_α J_{e_α} v.
    pub fn j_map(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m_v];
        for (za, j) in z.iter().zip(&self.j_maps) {
            for (o, x) in out.iter_mut().zip(j.apply(v)) {
                *o += za * x;
            }
        }
        out
    }

    /// [v, v']_α = ⟨J_{e_α} v, v'⟩.
    pub fn bracket(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        self.j_maps.iter().map(|j| dot(&j.apply(v), w)).collect()
    }

    pub fn n_multiply(&self, p: &NPoint, q: &NPoint) -> NPoint {
        let br = self.bracket(&p.v, &q.v);
        NPoint {
            v: p.v.iter().zip(&q.v).map(|(a, b)| a + b).collect(),
            z: (0..self.m_z).map(|i| p.z[i] + q.z[i] + 0.5 * br[i]).collect(),
        }
    }

    pub fn n_inverse(&self, p: &NPoint) -> NPoint {
        NPoint { v: p.v.iter().map(|x| -x).collect(), z: p.z.iter().map(|x| -x).collect() }
    }

    pub fn dilate(&self, a: f64, p: &NPoint) -> Result<NPoint> {
        if !(a > 0.0) {
            return invalid(format!("dilation needs a > 0, got {a}"));
        }
        let sa = a.sqrt();
        Ok(NPoint { v: p.v.iter().map(|x| sa * x).collect(), z: p.z.iter().map(|x| a * x).collect() })
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        let k = match self.family {
            Family::Complex => self.m_v / 2,
            Family::Quaternionic => self.m_v / 4,
        };
        AlgebraDescriptor { family: self.family, k, m_z: self.m_z }
    }
}

/// (|v|⁴/16 + |z|²)^{1/4}.
pub fn homogeneous_norm(p: &NPoint) -> f64 {
    let v2 = dot(&p.v, &p.v);
    let z2 = dot(&p.z, &p.z);
    (v2 * v2 / 16.0 + z2).powf(0.25)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// JSON form {"family": ..., "k": ..., "m_z": ...}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub family: Family,
    pub k: usize,
    pub m_z: usize,
}

impl AlgebraDescriptor {
    pub fn build(&self) -> Result<HTypeAlgebra> {
        match self.family {
            Family::Complex => {
                if self.m_z != 1 {
                    return invalid("complex family has m_z = 1");
                }
                HTypeAlgebra::complex_heisenberg(self.k)
            }
            Family::Quaternionic => HTypeAlgebra::quaternionic(self.k, self.m_z),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let h = HTypeAlgebra::complex_heisenberg(1).unwrap();
        assert_eq!((h.m_v(), h.m_z(), h.q(), h.dim()), (2, 1, 2.0, 4));
        let h2 = HTypeAlgebra::complex_heisenberg(2).unwrap();
        assert_eq!((h2.m_v(), h2.q(), h2.dim()), (4, 3.0, 6));
        let q2 = HTypeAlgebra::quaternionic(1, 2).unwrap();
        assert_eq!((q2.m_v(), q2.q(), q2.dim()), (4, 4.0, 7));
        let q3 = HTypeAlgebra::quaternionic(1, 3).unwrap();
        assert_eq!((q3.m_v(), q3.q(), q3.dim()), (4, 5.0, 8));
    }

    #[test]
    fn families_verify() {
        for k in 1..=3 {
            assert!(HTypeAlgebra::complex_heisenberg(k).unwrap().verify());
            for m_z in 1..=3 {
                assert!(HTypeAlgebra::quaternionic(k, m_z).unwrap().verify());
            }
        }
    }

    #[test]
    fn identity_j_fails() {
        let alg = HTypeAlgebra::from_parts(Family::Complex, vec![IntMatrix::identity(2)]).unwrap();
        assert!(!alg.verify());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(HTypeAlgebra::complex_heisenberg(0).is_err());
        assert!(HTypeAlgebra::quaternionic(1, 4).is_err());
        assert!(HTypeAlgebra::quaternionic(1, 0).is_err());
    }

    #[test]
    fn quaternion_i_times_one() {
        let alg = HTypeAlgebra::quaternionic(1, 1).unwrap();
        let jv = alg.j_map(&[1.0], &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(jv, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn heisenberg_bracket_from_matrix() {
        let alg = HTypeAlgebra::complex_heisenberg(1).unwrap();
        let want = dot(&alg.j_maps()[0].apply(&[1.0, 0.0]), &[0.0, 1.0]);
        assert_eq!(alg.bracket(&[1.0, 0.0], &[0.0, 1.0]), vec![want]);
        assert_eq!(want, 1.0);
    }

    #[test]
    fn dilation_examples() {
        let alg = HTypeAlgebra::complex_heisenberg(1).unwrap();
        let p = NPoint::new(vec![1.0, -2.0], vec![0.5]);
        assert_eq!(alg.dilate(4.0, &p).unwrap(), NPoint::new(vec![2.0, -4.0], vec![2.0]));
        assert_eq!(alg.dilate(1.0, &p).unwrap(), p);
        assert!(alg.dilate(0.0, &p).is_err());
        assert!(alg.dilate(-1.0, &p).is_err());
    }

    #[test]
    fn norm_examples() {
        let p = NPoint::new(vec![0.0, 0.0], vec![9.0]);
        assert!((homogeneous_norm(&p) - 3.0).abs() < 1e-15);
        let p = NPoint::new(vec![3.0, 4.0], vec![0.0]);
        assert!((homogeneous_norm(&p) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn descriptor_roundtrip() {
        let alg = HTypeAlgebra::quaternionic(2, 3).unwrap();
        let json = serde_json::to_string(&alg.descriptor()).unwrap();
        assert_eq!(json, r#"{"family":"quaternionic","k":2,"m_z":3}"#);
        let back: AlgebraDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap(), alg);
    }
}
