//! Library quantities checked against independent reference computations.

#![allow(clippy::needless_range_loop)]

use approx::assert_abs_diff_eq;
use core::f64::consts::PI;
use iga_mortar_core::assembly::{assemble_coupling, assemble_system, eval_point, normal_jump, ManufacturedSolution};
use iga_mortar_core::builtin;
use iga_mortar_core::geometry::PatchGeometry;
use iga_mortar_core::quadrature::gauss_legendre;
use iga_mortar_core::spaces::{multiplier_spaces, ConstraintMap, Discretization, MultiplierMode, VertexMode};
use iga_mortar_core::topology::MultiPatchTopology;
use nalgebra::DMatrix;

fn disc(name: &str, p: usize, levels: usize) -> Discretization {
    let t = MultiPatchTopology::new(builtin::builtin(name).unwrap()).unwrap();
    Discretization::new(&t, p, levels, None).unwrap()
}

/// Parameter of `x` on `g` by Newton's method.
fn invert(g: &PatchGeometry, x: [f64; 2], start: (f64, f64)) -> (f64, f64) {
    let (mut u, mut v) = start;
    for _ in 0..50 {
        let j = g.eval(u, v).unwrap();
        let r = [j.point[0] - x[0], j.point[1] - x[1]];
        u -= j.inv[0][0] * r[0] + j.inv[0][1] * r[1];
        v -= j.inv[1][0] * r[0] + j.inv[1][1] * r[1];
    }
    let back = g.point(u, v).unwrap();
    assert!((back[0] - x[0]).hypot(back[1] - x[1]) < 1e-13);
    (u, v)
}

#[test]
fn physical_derivatives_match_finite_differences() {
    let d = disc("quartercircle3", 3, 1);
    for patch in 0..3 {
        let g = &d.topology.patches[patch];
        let (u0, v0) = (0.37, 0.61);
        let pe = eval_point(&d, patch, u0, v0).unwrap();
        for (k, &dof) in pe.dofs.iter().enumerate() {
            // physical field of one basis function
            let phi = |x: [f64; 2]| -> f64 {
                let (u, v) = invert(g, x, (u0, v0));
                let e = eval_point(&d, patch, u, v).unwrap();
                e.dofs.iter().position(|&q| q == dof).map_or(0.0, |i| e.derivs[i].value)
            };
            let grad = |x: [f64; 2]| -> [f64; 2] {
                let (u, v) = invert(g, x, (u0, v0));
                let e = eval_point(&d, patch, u, v).unwrap();
                e.dofs
                    .iter()
                    .position(|&q| q == dof)
                    .map_or([0.0; 2], |i| e.derivs[i].grad)
            };
            let x = pe.x;
            let eps = 1e-5;
            let at = |dx: f64, dy: f64| [x[0] + dx, x[1] + dy];
            let fd_grad = [
                (phi(at(eps, 0.0)) - phi(at(-eps, 0.0))) / (2.0 * eps),
                (phi(at(0.0, eps)) - phi(at(0.0, -eps))) / (2.0 * eps),
            ];
            let (gx_p, gx_m) = (grad(at(eps, 0.0)), grad(at(-eps, 0.0)));
            let gy_p = grad(at(0.0, eps));
            let gy_m = grad(at(0.0, -eps));
            let fd_hess = [
                (gx_p[0] - gx_m[0]) / (2.0 * eps),
                (gy_p[0] - gy_m[0]) / (2.0 * eps),
                (gy_p[1] - gy_m[1]) / (2.0 * eps),
            ];
            let exact = &pe.derivs[k];
            let scale = exact.hess.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for a in 0..2 {
                assert_abs_diff_eq!(fd_grad[a], exact.grad[a], epsilon = 1e-5 * scale);
            }
            for a in 0..3 {
                assert_abs_diff_eq!(fd_hess[a], exact.hess[a], epsilon = 1e-5 * scale);
            }
        }
    }
}

#[test]
fn interface_pullback_matches_physical_normal_derivative() {
    let t = MultiPatchTopology::new(builtin::quartercircle3()).unwrap();
    let phi = |x: [f64; 2]| (2.0 * x[0]).sin() + x[0] * x[1] * x[1] + (x[1] - 0.3).exp();
    let grad = |x: [f64; 2]| {
        [
            2.0 * (2.0 * x[0]).cos() + x[1] * x[1],
            2.0 * x[0] * x[1] + (x[1] - 0.3).exp(),
        ]
    };
    for l in 0..t.interfaces.len() {
        let itf = t.interfaces[l];
        for y in [0.13, 0.5, 0.77] {
            let f = t.interface_frame(l, y).unwrap();
            let g = grad(f.point);
            let exact = g[0] * f.normal[0] + g[1] * f.normal[1];
            let sides = [
                (itf.primary, f.primary_param, f.alpha_primary, f.beta_primary, 1.0),
                (
                    itf.secondary,
                    f.secondary_param,
                    f.alpha_secondary,
                    f.beta_secondary,
                    if itf.reversed { -1.0 } else { 1.0 },
                ),
            ];
            for (s, (u, v), alpha, beta, tsign) in sides {
                let geo = &t.patches[s.patch];
                let pull = |du: f64, dv: f64| phi(geo.point(u + du, v + dv).unwrap());
                let h = 1e-5;
                let step = |axis: usize, sgn: f64, k: f64| {
                    if axis == 0 {
                        (sgn * k * h, 0.0)
                    } else {
                        (0.0, sgn * k * h)
                    }
                };
                // one-sided second-order difference pointing into the patch
                let tr = s.side.transversal_axis();
                let sg = s.side.inward_sign();
                let (a1, b1) = step(tr, sg, 1.0);
                let (a2, b2) = step(tr, sg, 2.0);
                let d_tr = (-3.0 * pull(0.0, 0.0) + 4.0 * pull(a1, b1) - pull(a2, b2)) / (2.0 * h);
                let tg = s.side.tangential_axis();
                let (c1, d1) = step(tg, 1.0, 1.0);
                let d_tg = (pull(c1, d1) - pull(-c1, -d1)) / (2.0 * h);
                let got = alpha * d_tr + beta * tsign * d_tg;
                assert_abs_diff_eq!(got, exact, epsilon = 1e-5);
            }
        }
    }
}

#[test]
fn quarter_arc_length() {
    let d = disc("quartercircle3", 3, 3);
    let rule = gauss_legendre(d.degree + 1).unwrap();
    let mut len = 0.0;
    for patch in [1, 2] {
        let g = &d.topology.patches[patch];
        let bp = d.spaces[patch].v.breakpoints();
        assert!(bp.len() > 8);
        for w in bp.windows(2) {
            len += rule.integrate(w[0], w[1], |v| {
                let j = g.eval(1.0, v).unwrap();
                j.jac[0][1].hypot(j.jac[1][1])
            });
        }
    }
    assert_abs_diff_eq!(len, PI / 2.0, epsilon = 1e-10);
}

/// `∫ D²φ : D²ψ` over `[x0, x0+1] × [0, 1]` with an 8-point rule, where
/// the patch map is a translation.
fn stiffness_oracle(d: &Discretization, a: &[f64], b: &[f64]) -> f64 {
    let rule = gauss_legendre(8).unwrap();
    let mut total = 0.0;
    for patch in 0..d.spaces.len() {
        let s = &d.spaces[patch];
        for wu in s.u.breakpoints().windows(2) {
            for wv in s.v.breakpoints().windows(2) {
                let (us, uw) = rule.mapped(wu[0], wu[1]);
                let (vs, vw) = rule.mapped(wv[0], wv[1]);
                for (u, wu) in us.iter().zip(&uw) {
                    for (v, wv) in vs.iter().zip(&vw) {
                        let bu = s.u.eval(*u, 2).unwrap();
                        let bv = s.v.eval(*v, 2).unwrap();
                        let mut ha = [0.0; 3];
                        let mut hb = [0.0; 3];
                        for i in bu.indices() {
                            for j in bv.indices() {
                                let g = d.global(patch, i, j);
                                let h = [
                                    bu.get(2, i) * bv.get(0, j),
                                    bu.get(1, i) * bv.get(1, j),
                                    bu.get(0, i) * bv.get(2, j),
                                ];
                                for c in 0..3 {
                                    ha[c] += a[g] * h[c];
                                    hb[c] += b[g] * h[c];
                                }
                            }
                        }
                        total += wu * wv * (ha[0] * hb[0] + 2.0 * ha[1] * hb[1] + ha[2] * hb[2]);
                    }
                }
            }
        }
    }
    total
}

#[test]
fn stiffness_entries_match_high_order_oracle() {
    let d = disc("square2", 3, 2);
    let c = ConstraintMap::build(&d, VertexMode::C2).unwrap();
    let m = multiplier_spaces(&d, MultiplierMode::Merged).unwrap();
    let sys = assemble_system(&d, &c, &m, &ManufacturedSolution::Zero).unwrap();
    let unit = |r: usize| {
        let mut z = vec![0.0; c.reduced_dim];
        z[r] = 1.0;
        c.expand(&z, None)
    };
    let dense = sys.a.to_dense();
    for r in (0..c.reduced_dim).step_by(3) {
        for s in (r..c.reduced_dim).step_by(4) {
            let want = stiffness_oracle(&d, &unit(r), &unit(s));
            assert_abs_diff_eq!(dense[(r, s)], want, epsilon = 1e-10 * want.abs().max(1.0));
        }
    }
}

#[test]
fn coupling_entries_match_high_order_oracle() {
    let d = disc("square2", 3, 3);
    let m = multiplier_spaces(&d, MultiplierMode::Merged).unwrap();
    let (b, offsets) = assemble_coupling(&d, &m, d.degree + 1).unwrap();
    let kv = m[0].knots.as_ref().unwrap();
    // patch 0 east meets patch 1 west along x = 1; jump of ∂x, right minus left
    let rule = gauss_legendre(12).unwrap();
    let mut want = DMatrix::<f64>::zeros(kv.dimension(), d.full_dim());
    for w in d.spaces[0].v.breakpoints().windows(2) {
        let (ys, ws) = rule.mapped(w[0], w[1]);
        for (y, wy) in ys.into_iter().zip(ws) {
            let mu = kv.eval(y, 0).unwrap();
            for (patch, u, sign) in [(0usize, 1.0, -1.0), (1, 0.0, 1.0)] {
                let s = &d.spaces[patch];
                let bu = s.u.eval(u, 1).unwrap();
                let bv = s.v.eval(y, 0).unwrap();
                for i in bu.indices() {
                    for j in bv.indices() {
                        let g = d.global(patch, i, j);
                        let jump = sign * bu.get(1, i) * bv.get(0, j);
                        for r in mu.indices() {
                            want[(r, g)] += wy * mu.get(0, r) * jump;
                        }
                    }
                }
            }
        }
    }
    assert_eq!(offsets, vec![0, kv.dimension()]);
    let got = b.to_dense();
    assert_eq!(got.shape(), want.shape());
    let scale = want.amax();
    assert!((&got - &want).amax() <= 1e-12 * scale);
    // the jump of a function that is linear across the interface vanishes
    let (_, row) = normal_jump(&d, 0, 0.4).unwrap();
    let lin: f64 = row
        .iter()
        .map(|&(g, v)| {
            let (patch, k) = if g < d.offsets[1] {
                (0, g)
            } else {
                (1, g - d.offsets[1])
            };
            let (i, _) = d.spaces[patch].unflatten(k);
            let kvu = &d.spaces[patch].u;
            // Greville abscissa reproduces x exactly
            let p = kvu.degree();
            let gx = kvu.knots()[i + 1..=i + p].iter().sum::<f64>() / p as f64;
            v * (gx + patch as f64)
        })
        .sum();
    assert_abs_diff_eq!(lin, 0.0, epsilon = 1e-12);
}

#[test]
fn vertex_constraints_match_dense_null_space() {
    for (name, levels) in [("square4", 1), ("quartercircle3", 1), ("square12", 0)] {
        let d = disc(name, 3, levels);
        let c = ConstraintMap::build(&d, VertexMode::C2).unwrap();
        let n = d.full_dim();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        // clamped coefficients
        for s in &d.dirichlet {
            for layer in 0..2 {
                for k in 0..d.side_len(*s) {
                    let mut r = vec![0.0; n];
                    r[d.side_dof(*s, layer, k)] = 1.0;
                    rows.push(r);
                }
            }
        }
        // coincident traces
        for itf in &d.topology.interfaces {
            let len = d.side_len(itf.primary);
            for k in 0..len {
                let ks = if itf.reversed { len - 1 - k } else { k };
                let mut r = vec![0.0; n];
                r[d.side_dof(itf.primary, 0, k)] += 1.0;
                r[d.side_dof(itf.secondary, 0, ks)] -= 1.0;
                rows.push(r);
            }
        }
        // equal physical 2-jets at shared vertices
        for vx in d.topology.shared_vertices() {
            let jets: Vec<Vec<[f64; 6]>> = vx
                .incident
                .iter()
                .map(|&(patch, corner)| {
                    let (u, v) = corner.param();
                    let pe = eval_point(&d, patch, u, v).unwrap();
                    let mut out = vec![[0.0; 6]; n];
                    for (g, dv) in pe.dofs.iter().zip(&pe.derivs) {
                        out[*g] = [dv.value, dv.grad[0], dv.grad[1], dv.hess[0], dv.hess[1], dv.hess[2]];
                    }
                    out
                })
                .collect();
            for other in &jets[1..] {
                for comp in 0..6 {
                    rows.push((0..n).map(|g| jets[0][g][comp] - other[g][comp]).collect());
                }
            }
        }
        let mut cm = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        for mut r in cm.row_iter_mut() {
            let s = r.amax();
            if s > 0.0 {
                r /= s;
            }
        }
        let sv = cm.clone().svd(false, false).singular_values;
        let rank = sv.iter().filter(|&&s| s > 1e-9 * sv.max()).count();
        assert_eq!(c.reduced_dim, n - rank, "{name}");
        // every column of R satisfies every condition
        for r in 0..c.reduced_dim {
            let mut z = vec![0.0; c.reduced_dim];
            z[r] = 1.0;
            let col = nalgebra::DVector::from_vec(c.expand(&z, None));
            assert!((&cm * col).amax() < 1e-9, "{name} column {r}");
        }
    }
}
