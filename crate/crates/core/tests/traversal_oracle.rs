use occray::grid::{ClassTaxonomy, GridGeometry, VoxelCoord, VoxelGrid};
use occray::raycast::{cast_ray, oracle_march, Hit, Traversal};
use occray::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_grid(rng: &mut ChaCha8Rng, n: usize, density: f64) -> VoxelGrid {
    let g = GridGeometry::new([n, n, n], Vec3::new(-1.5, 2.25, -0.5), 0.25).unwrap();
    let labels = (0..n * n * n)
        .map(|_| {
            if rng.gen_bool(density) {
                rng.gen_range(0..17)
            } else {
                17
            }
        })
        .collect();
    VoxelGrid::new(g, ClassTaxonomy::default(), labels).unwrap()
}

fn random_ray(rng: &mut ChaCha8Rng, g: &GridGeometry) -> (Vec3, Vec3) {
    let lo = g.origin - Vec3::repeat(1.0);
    let hi = g.max_corner() + Vec3::repeat(1.0);
    let o = Vec3::new(
        rng.gen_range(lo.x..hi.x),
        rng.gen_range(lo.y..hi.y),
        rng.gen_range(lo.z..hi.z),
    );
    loop {
        let d = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = d.norm();
        if n > 0.1 && n <= 1.0 {
            return (o, d / n);
        }
    }
}

/// Entry parameter of the ray into the closed box of voxel `c`, if it meets it.
fn box_entry(g: &GridGeometry, c: VoxelCoord, o: &Vec3, d: &Vec3) -> Option<(f64, f64)> {
    let lo = g.origin + Vec3::new(c.x as f64, c.y as f64, c.z as f64) * g.voxel_size;
    let hi = lo + Vec3::repeat(g.voxel_size);
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for a in 0..3 {
        if d[a] == 0.0 {
            if o[a] < lo[a] || o[a] > hi[a] {
                return None;
            }
            continue;
        }
        let (ta, tb) = ((lo[a] - o[a]) / d[a], (hi[a] - o[a]) / d[a]);
        t0 = t0.max(ta.min(tb));
        t1 = t1.min(ta.max(tb));
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Slab-tests every occupied voxel and returns the one entered first.
fn brute_force_first_hit(
    grid: &VoxelGrid,
    o: &Vec3,
    d: &Vec3,
    max_range: f64,
) -> Option<(VoxelCoord, f64, f64)> {
    let g = grid.geometry();
    let mut best: Option<(VoxelCoord, f64, f64)> = None;
    for i in 0..grid.voxel_count() {
        let c = g.coord_of(i);
        if grid.is_free(c) {
            continue;
        }
        if let Some((t0, t1)) = box_entry(g, c, o, d) {
            if t0 <= max_range && best.is_none_or(|b| t0 < b.1) {
                best = Some((c, t0, t1));
            }
        }
    }
    best
}

#[test]
fn traversal_matches_brute_force_slab_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0A);
    let mut hits = 0;
    for _ in 0..12 {
        let grid = random_grid(&mut rng, 16, 0.06);
        for _ in 0..250 {
            let (o, d) = random_ray(&mut rng, grid.geometry());
            let fast = cast_ray(&grid, &o, &d, 3.0).unwrap();
            let slow = brute_force_first_hit(&grid, &o, &d, 3.0);
            match (fast, slow) {
                (None, None) => {}
                (Some(h), Some((c, t0, _))) => {
                    hits += 1;
                    assert_eq!(h.coord, c, "ray {o:?} {d:?}");
                    assert!((h.distance - t0).abs() < 1e-9);
                }
                // a tangential touch of a box edge is a zero-length chord the cells never own
                (None, Some((_, t0, t1))) => assert!(t1 - t0 < 1e-9, "{o:?} {d:?}"),
                (f, s) => panic!("cast_ray {f:?} vs brute force {s:?}"),
            }
        }
    }
    assert!(hits > 500, "too few hits to be meaningful: {hits}");
}

fn chord_length(grid: &VoxelGrid, o: &Vec3, d: &Vec3, h: &Hit) -> f64 {
    let mut walk = Traversal::new(grid.geometry(), o, d, f64::MAX).unwrap();
    walk.find(|(c, _)| *c == h.coord).unwrap();
    let exit = walk
        .next()
        .map(|(_, t)| t)
        .unwrap_or_else(|| box_entry(grid.geometry(), h.coord, o, d).unwrap().1);
    exit - h.distance
}

#[test]
fn marching_oracle_lags_but_never_leads() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut agreements, mut skipped) = (0, 0);
    for _ in 0..6 {
        let grid = random_grid(&mut rng, 24, 0.02);
        let step = grid.voxel_size() / 10.0;
        for _ in 0..300 {
            let (o, d) = random_ray(&mut rng, grid.geometry());
            let exact = cast_ray(&grid, &o, &d, 20.0).unwrap();
            let marched = oracle_march(&grid, &o, &d, 20.0, step).unwrap();
            match (exact, marched) {
                (None, None) => {}
                (Some(e), Some(m)) if e.coord == m.coord => {
                    agreements += 1;
                    assert!(m.distance >= e.distance - 1e-12);
                    assert!(m.distance - e.distance < step);
                }
                // the sampler skipped a voxel the ray clips for less than one step
                (Some(e), m) => {
                    skipped += 1;
                    assert!(chord_length(&grid, &o, &d, &e) < step + 1e-12);
                    if let Some(m) = m {
                        assert!(m.distance > e.distance);
                    }
                }
                (None, Some(m)) => panic!("oracle hit {m:?} that the traversal missed"),
            }
        }
    }
    println!("oracle agreed on {agreements} hits, skipped a thin chord on {skipped}");
    assert!(agreements > 250);
}

#[test]
fn every_traversed_voxel_is_pierced() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = GridGeometry::new([10, 7, 5], Vec3::new(0.3, -2.0, 1.0), 0.5).unwrap();
    for _ in 0..500 {
        let (o, d) = random_ray(&mut rng, &g);
        let cells: Vec<_> = Traversal::new(&g, &o, &d, 100.0).unwrap().collect();
        for w in cells.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
        for (c, t) in &cells {
            let (t0, t1) = box_entry(&g, *c, &o, &d).expect("traversed voxel must meet the ray");
            assert!((t - t0).abs() < 1e-9 && t1 >= t0);
        }
    }
}
