use super::{EdgeAdjacency, TriangleMesh};

/// Edge-connected components of `subset`, each sorted ascending, ordered by
/// their smallest face index. Duplicate entries in `subset` are ignored.
pub fn connected_components(
    mesh: &TriangleMesh,
    adjacency: &EdgeAdjacency,
    subset: &[usize],
) -> Vec<Vec<usize>> {
    let mut member = vec![false; mesh.face_count()];
    for &f in subset {
        member[f] = true;
    }
    let mut seen = vec![false; mesh.face_count()];
    let mut out = Vec::new();
    // Scanning faces in index order makes each component's seed its minimum.
    for start in 0..mesh.face_count() {
        if !member[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(f) = stack.pop() {
            comp.push(f);
            for g in adjacency.face_neighbors(f) {
                if member[g] && !seen[g] {
                    seen[g] = true;
                    stack.push(g);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::mesh::test_shapes::*;
    use proptest::prelude::*;

    #[test]
    fn connected_mesh_is_one_component() {
        let m = unit_cube();
        let adj = EdgeAdjacency::build(&m);
        let all: Vec<usize> = (0..m.face_count()).collect();
        assert_eq!(connected_components(&m, &adj, &all), vec![all]);
    }

    #[test]
    fn two_disjoint_cubes() {
        let a = unit_cube();
        let b = offset(&a, Vec3::new(5.0, 0.0, 0.0));
        let m = TriangleMesh::merge(&[&a, &b]);
        let adj = EdgeAdjacency::build(&m);
        let all: Vec<usize> = (0..m.face_count()).collect();
        let comps = connected_components(&m, &adj, &all);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn empty_subset_gives_no_components() {
        let m = unit_cube();
        let adj = EdgeAdjacency::build(&m);
        assert!(connected_components(&m, &adj, &[]).is_empty());
    }

    proptest! {
        #[test]
        fn components_partition_the_subset(mask in proptest::collection::vec(any::<bool>(), 50)) {
            let m = flat_grid(5);
            let adj = EdgeAdjacency::build(&m);
            let subset: Vec<usize> = (0..50).filter(|&i| mask[i]).collect();
            let comps = connected_components(&m, &adj, &subset);
            let mut flat: Vec<usize> = comps.iter().flatten().copied().collect();
            flat.sort_unstable();
            prop_assert_eq!(flat, subset);
            for w in comps.windows(2) {
                prop_assert!(w[0][0] < w[1][0]);
            }
        }
    }
}
