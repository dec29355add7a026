//! Part decomposition shared by both objects of a trial.
//!
//! The union bounding box of the two objects (each in its own base-plate
//! frame) is split into octant regions. Each block belongs to the region of
//! its origin voxel; a part is a face-connected cluster of blocks within a
//! region. Regions are the unit of comparison and carry the part ids that
//! appear in traces.

use std::collections::BTreeSet;

use crate::objectgen::{BlockObject, Voxel, NEIGHBOURS};
use crate::percept::Target;

pub const REGIONS: u8 = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartDecomposition {
    /// First voxel coordinate of the upper half, per axis.
    pub split: [i32; 3],
    /// Union bounding box, exclusive.
    pub extent: [i32; 3],
    a: [Vec<usize>; 8],
    b: [Vec<usize>; 8],
}

impl PartDecomposition {
    pub fn new(a: &BlockObject, b: &BlockObject) -> Self {
        let (ea, eb) = (a.extent(), b.extent());
        let extent = [ea[0].max(eb[0]), ea[1].max(eb[1]), ea[2].max(eb[2])];
        let split = extent.map(|e| (e + 1) / 2);
        let assign = |o: &BlockObject| {
            let mut out: [Vec<usize>; 8] = Default::default();
            for (i, blk) in o.blocks.iter().enumerate() {
                out[usize::from(region_of(blk.origin, split))].push(i);
            }
            out
        };
        PartDecomposition {
            split,
            extent,
            a: assign(a),
            b: assign(b),
        }
    }

    /// Block indices of `target` assigned to region `r`.
    pub fn blocks(&self, target: Target, r: u8) -> &[usize] {
        match target {
            Target::A => &self.a[usize::from(r)],
            Target::B => &self.b[usize::from(r)],
            Target::Environment => &[],
        }
    }

    /// Regions holding at least one block of either object.
    pub fn regions(&self) -> Vec<u8> {
        (0..REGIONS)
            .filter(|&r| !self.a[usize::from(r)].is_empty() || !self.b[usize::from(r)].is_empty())
            .collect()
    }

    pub fn voxels(&self, obj: &BlockObject, target: Target, r: u8) -> BTreeSet<Voxel> {
        self.blocks(target, r)
            .iter()
            .flat_map(|&i| obj.blocks[i].voxels())
            .collect()
    }

    /// Whether region `r` holds the same geometry on both objects.
    pub fn matches(&self, a: &BlockObject, b: &BlockObject, r: u8) -> bool {
        self.voxels(a, Target::A, r) == self.voxels(b, Target::B, r)
    }

    /// Centre of region `r` in local voxel coordinates.
    pub fn region_center(&self, r: u8) -> [f64; 3] {
        let mut c = [0.0; 3];
        for (axis, c) in c.iter_mut().enumerate() {
            let (lo, hi) = if r >> axis & 1 == 0 {
                (0, self.split[axis])
            } else {
                (self.split[axis], self.extent[axis])
            };
            *c = f64::from(lo + hi) / 2.0;
        }
        c
    }

    /// Parts of one object: face-connected block clusters per region.
    pub fn parts(&self, obj: &BlockObject, target: Target) -> Vec<(u8, Vec<usize>)> {
        let mut out = Vec::new();
        for r in 0..REGIONS {
            let ids = self.blocks(target, r);
            let mut left: Vec<usize> = ids.to_vec();
            while let Some(seed) = left.pop() {
                let mut comp = vec![seed];
                let mut k = 0;
                while k < comp.len() {
                    let cur = comp[k];
                    let (touching, rest): (Vec<usize>, Vec<usize>) =
                        left.iter().partition(|&&j| blocks_touch(obj, cur, j));
                    comp.extend(touching);
                    left = rest;
                    k += 1;
                }
                comp.sort_unstable();
                out.push((r, comp));
            }
        }
        out
    }
}

pub fn region_of(v: Voxel, split: [i32; 3]) -> u8 {
    u8::from(v.x >= split[0]) | u8::from(v.y >= split[1]) << 1 | u8::from(v.z >= split[2]) << 2
}

fn blocks_touch(obj: &BlockObject, i: usize, j: usize) -> bool {
    let other: BTreeSet<Voxel> = obj.blocks[j].voxels().collect();
    obj.blocks[i].voxels().any(|v| {
        NEIGHBOURS
            .iter()
            .any(|n| other.contains(&Voxel::new(v.x + n[0], v.y + n[1], v.z + n[2])))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectgen::{generate_object, ComplexityClass, ObjectLibrary};

    #[test]
    fn parts_partition_blocks() {
        for seed in 0..50 {
            let o = generate_object(ComplexityClass::Hard, seed);
            let d = PartDecomposition::new(&o, &o);
            let mut seen: Vec<usize> = d
                .parts(&o, Target::A)
                .into_iter()
                .flat_map(|(_, c)| c)
                .collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..o.block_count()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn region_comparison_is_exact() {
        let lib = ObjectLibrary::generate(11);
        for a in &lib.objects {
            for b in &lib.objects {
                let d = PartDecomposition::new(a, b);
                let all = d.regions().iter().all(|&r| d.matches(a, b, r));
                assert_eq!(all, a.voxels() == b.voxels(), "{} {}", a.id, b.id);
                assert_eq!(all, a.id == b.id);
            }
        }
    }
}
