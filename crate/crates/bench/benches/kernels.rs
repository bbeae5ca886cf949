use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use taylorom::sem::Load;
use taylorom::{gs_try_accept, BcKind, Provenance};
use taylorom_bench::{field, reference};

fn stiffness(c: &mut Criterion) {
    let p = reference(BcKind::Dirichlet, 10);
    let solver = p.full_solver(0.0).unwrap();
    let u = field(p.grid.node_count(), 1);
    let mut out = vec![0.0; u.len()];
    c.bench_function("stiffness_apply_201x201", |b| {
        b.iter(|| solver.ops.stiffness.apply(black_box(&u), &mut out))
    });
}

fn leapfrog(c: &mut Criterion) {
    for bc in [BcKind::Dirichlet, BcKind::Abc1] {
        let p = reference(bc, 10);
        let solver = p.full_solver(0.0).unwrap();
        let len = p.grid.node_count();
        let (prev, curr) = (field(len, 2), field(len, 3));
        let (mut next, mut ku) = (vec![0.0; len], vec![0.0; len]);
        let load = Load::Point { node: len / 2, value: 1.0 };
        c.bench_function(&format!("leapfrog_step_{}", bc.as_str()), |b| {
            b.iter(|| solver.ops.step(black_box(&prev), &curr, load, &mut next, &mut ku))
        });
    }
}

fn gram_schmidt(c: &mut Criterion) {
    let p = reference(BcKind::Dirichlet, 4000);
    let basis = p.build_qr(0).unwrap().basis;
    let inner = p.inner_product(basis.kind());
    let s = field(p.grid.node_count(), 4);
    let prov = Provenance { level: 0, step: 0 };
    c.bench_function(&format!("gs_accept_after_{}", basis.count()), |b| {
        b.iter_batched(
            || basis.clone(),
            |mut bs| gs_try_accept(black_box(&s), prov, &mut bs, &inner, 1).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn reduced_step(c: &mut Criterion) {
    for bc in [BcKind::Dirichlet, BcKind::Abc1] {
        let p = reference(bc, 4000);
        let basis = p.build_qr(0).unwrap().basis;
        let sys = p.reduce(&basis).unwrap().assemble_at_alpha(1e-3).unwrap();
        let n = sys.size();
        let (prev, curr) = (field(n, 5), field(n, 6));
        let (mut next, mut work) = (vec![0.0; n], vec![0.0; 2 * n]);
        c.bench_function(&format!("reduced_step_{}_n{n}", bc.as_str()), |b| {
            b.iter(|| sys.step(black_box(&prev), &curr, 0.5, &mut next, &mut work))
        });
    }
}

criterion_group!(benches, stiffness, leapfrog, gram_schmidt, reduced_step);
criterion_main!(benches);
