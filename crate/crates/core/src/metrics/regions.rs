//! 8-connected components of binary masks.

use std::collections::VecDeque;

use crate::tensor::BinaryMask;

/// Ground-truth regions as sorted flat pixel indices (`row * width + col`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegionSet {
    regions: Vec<Vec<usize>>,
}

impl RegionSet {
    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Per-pixel region id, `None` for background.
    pub fn labels(&self, pixels: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; pixels];
        for (id, r) in self.regions.iter().enumerate() {
            for &p in r {
                out[p] = Some(id);
            }
        }
        out
    }
}

pub fn connected_components(m: &BinaryMask) -> RegionSet {
    let (h, w) = (m.height(), m.width());
    let bits = m.bits();
    let mut seen = vec![false; h * w];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..h * w {
        if bits[start] == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut region = Vec::new();
        while let Some(p) = queue.pop_front() {
            region.push(p);
            let (r, c) = ((p / w) as isize, (p % w) as isize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                        continue;
                    }
                    let q = rr as usize * w + cc as usize;
                    if bits[q] != 0 && !seen[q] {
                        seen[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        region.sort_unstable();
        regions.push(region);
    }
    RegionSet { regions }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BinaryMask {
        let bits = rows.iter().flat_map(|r| r.bytes().map(|b| (b == b'#') as u8)).collect();
        BinaryMask::new(rows.len(), rows[0].len(), bits).unwrap()
    }

    #[test]
    fn examples() {
        assert!(connected_components(&mask(&["...", "..."])).is_empty());
        assert_eq!(connected_components(&mask(&["#.", ".#"])).len(), 1);
        assert_eq!(connected_components(&mask(&["#.", "..", "#."])).len(), 2);
    }

    #[test]
    fn partition_of_positives() {
        let m = mask(&["##..#", "#...#", "..#..", ".....", "##.##"]);
        let set = connected_components(&m);
        assert_eq!(set.len(), 5);
        let mut all: Vec<usize> = set.regions().concat();
        all.sort_unstable();
        let expected: Vec<usize> = (0..25).filter(|&i| m.bits()[i] == 1).collect();
        assert_eq!(all, expected);
    }
}
