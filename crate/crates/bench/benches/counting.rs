use criterion::{criterion_group, criterion_main, Criterion};
use spatialmix::exactcount::{count_bruteforce, count_transfer, Configuration};
use spatialmix::lattice::{Constraint, FiniteRegion};

fn bench_counting(c: &mut Criterion) {
    let fixed = Configuration::empty();
    let small = FiniteRegion::rect(Constraint::Nak, 5, 5).unwrap();
    c.bench_function("bruteforce nak 5x5", |b| {
        b.iter(|| count_bruteforce(&small, &fixed).unwrap())
    });
    for cons in Constraint::ALL {
        let region = FiniteRegion::rect(cons, 10, 10).unwrap();
        c.bench_function(&format!("transfer {cons} 10x10"), |b| {
            b.iter(|| count_transfer(&region, &fixed).unwrap())
        });
    }
}

criterion_group!(benches, bench_counting);
criterion_main!(benches);
