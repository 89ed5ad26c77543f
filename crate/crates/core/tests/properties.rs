mod common;

use std::sync::Arc;

use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use plab::cone::TruncatingHalfspace;
use plab::family::{find_c, make_family, FamilyConstructor, PFamily};
use plab::lab::Lab;
use plab::pbody::*;
use plab::psystem::{degree_at_least, validate_p_system, PSystem};
use plab::sampling::{stratified_volume, McOptions};
use plab::semigroup::{SemigroupIdeal, StandardSemigroup};
use plab::toric::{m_adic_order, MonomialIdeal};
use plab::{LatticePoint, WeightVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn m_primary() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=3).prop_flat_map(|d| {
        (
            prop::collection::vec(1i64..=6, d),
            prop::collection::vec(prop::collection::vec(0i64..=6, d), 0..=5 - d),
        )
            .prop_map(move |(powers, extra)| {
                let mut gens: Vec<Vec<i64>> = powers
                    .iter()
                    .enumerate()
                    .map(|(i, &k)| {
                        let mut g = vec![0; d];
                        g[i] = k;
                        g
                    })
                    .collect();
                gens.extend(extra.into_iter().filter(|g| g.iter().any(|&x| x > 0)));
                gens
            })
    })
}

fn family_of(gens: &[Vec<i64>], which: u8, t: BigRational) -> Arc<PFamily> {
    let i = ideal(&reg(gens[0].len()), gens);
    let ctor = match which % 3 {
        0 => FamilyConstructor::Frobenius(i),
        1 => FamilyConstructor::Power(i, t),
        _ => FamilyConstructor::Cartier(i),
    };
    make_family(ctor, 0).unwrap()
}

fn sum_below(d: usize, alpha: BigRational) -> TruncatingHalfspace {
    TruncatingHalfspace::new(WeightVector::from_i64(&vec![1; d]).unwrap(), alpha).unwrap()
}

fn small_t() -> impl Strategy<Value = BigRational> {
    (1i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn sorted(v: &[LatticePoint]) -> Vec<LatticePoint> {
    let mut v = v.to_vec();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn colength_matches_per_point_count(gens in m_primary()) {
        let i = ideal(&reg(gens[0].len()), &gens);
        prop_assert_eq!(i.colength().unwrap(), big(brute_colength(&gens)));
    }

    #[test]
    fn frobenius_identity(gens in m_primary(), e in 1u32..=3) {
        let d = gens[0].len();
        let i = ideal(&reg(d), &gens);
        let q = 1u64 << e;
        let expect = i.colength().unwrap() * BigInt::from(q).pow(d as u32);
        prop_assert_eq!(i.frobenius_power(q).unwrap().colength().unwrap(), expect);
    }

    #[test]
    fn exact_and_counting_hk_agree(gens in m_primary()) {
        let i = ideal(&reg(gens[0].len()), &gens);
        let exact = i.e_hk_exact().unwrap();
        prop_assert_eq!(&exact, &BigRational::from_integer(i.colength().unwrap()));
        let counted = i.e_hk_counting(3).unwrap();
        prop_assert!(counted.sequence.iter().all(|p| p.value == exact));
        prop_assert_eq!(counted.extrapolated_limit, exact);
    }

    #[test]
    fn cartier_contraction_is_frobenius(gens in m_primary(), e in 0u32..=3) {
        let i = ideal(&reg(gens[0].len()), &gens);
        let q = 1u64 << e;
        let c = i.cartier_contraction(q).unwrap();
        let f = i.frobenius_power(q).unwrap();
        prop_assert_eq!(sorted(c.generators()), sorted(f.generators()));
    }

    #[test]
    fn find_c_certificate(gens in m_primary(), which in 0u8..3, t in small_t(), seed in any::<u64>()) {
        let d = gens[0].len();
        let fam = family_of(&gens, which, t);
        let cert = find_c(&fam, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for e in 0..=3 {
            let q = 1i64 << e;
            let level = fam.level(e).unwrap();
            let need = cert.c as i64 * q;
            for _ in 0..20 {
                let mut u: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=need)).collect();
                let short = need - u.iter().sum::<i64>();
                if short > 0 {
                    u[rng.gen_range(0..d)] += short;
                }
                prop_assert!(level.staircase().contains_i64(&u), "{:?} at q = {}", u, q);
            }
        }
        if let Some(w) = cert.witness {
            let level = fam.level(w.e).unwrap();
            prop_assert!(!level.staircase().contains(&w.point));
            prop_assert!(w.order >= (cert.c - 1) * w.q);
            prop_assert_eq!(BigInt::from(w.order), w.point.coord_sum());
        }
    }

    #[test]
    fn validators_agree(k in 1u64..=3, j in 1u32..=2, shift in 0u64..=2, d in 1usize..=2) {
        let m = MonomialIdeal::maximal(reg(d));
        let fam = Arc::new(
            PFamily::from_constructor(FamilyConstructor::Custom {
                label: "k q^j + s".into(),
                ring: reg(d),
                rule: Arc::new(move |q| m.ordinary_power(k * q.pow(j) + shift)),
            })
            .unwrap(),
        );
        let direct = fam.validate(3).unwrap();
        let system = fam.to_system().unwrap();
        let via_system = validate_p_system(&system, 3).unwrap();
        prop_assert_eq!(&direct, &via_system);
        // m^{n(q)} is a p-family iff 2 n(q) >= n(2q).
        let ok = (0..3).all(|e| {
            let q = 1u64 << e;
            2 * (k * q.pow(j) + shift) >= k * (2 * q).pow(j) + shift
        });
        prop_assert_eq!(direct.passed(), ok);
    }

    #[test]
    fn reconciliation_identity(gens in m_primary(), which in 0u8..3, t in small_t()) {
        let fam = family_of(&gens, which, t);
        let lab = Lab::default();
        let h = lab.derived_halfspace(&fam, 3).unwrap().halfspace();
        for row in lab.reconcile_lengths(&fam, &h, 0..=3).unwrap() {
            prop_assert!(row.holds, "{:?}", row);
        }
    }

    #[test]
    fn frobenius_of_a_level_stays_below(gens in m_primary(), t in small_t(), e_prime in 0u32..=3) {
        prop_assume!(gens[0].len() <= 2);
        let d = gens[0].len();
        let fam = family_of(&gens, 1, t);
        let h = sum_below(d, rat(4, 1));
        let mc = McOptions::default();
        let system = Arc::new(fam.to_system().unwrap());
        let full = pbody_truncated_volume(&PBody::new(system), &h, 4, &mc).unwrap().value;
        let q = 1u64 << e_prime;
        let level = fam.level(e_prime).unwrap().staircase().clone();
        let frob = Arc::new(PSystem::frobenius_induced(level, 2).unwrap());
        let scaled = h.scaled(&BigRational::from_integer(q.into()));
        let v = pbody_truncated_volume(&PBody::new(frob), &scaled, 0, &mc).unwrap().value
            / BigRational::from_integer(BigInt::from(q).pow(d as u32));
        prop_assert!(v <= full, "{} > {}", v, full);
    }

    #[test]
    fn count_scaled_is_a_box_count(gens in m_primary(), num in 1i64..=20, den in 1i64..=3, e in 0u32..=2) {
        let d = gens[0].len();
        let t = ideal(&reg(d), &gens).staircase().clone();
        let alpha = rat(num, den);
        let h = sum_below(d, alpha.clone());
        let q = 1i64 << e;
        let bound = (q * num).div_euclid(den) + 1;
        let mut brute = 0u64;
        let mut u = vec![0i64; d];
        'outer: loop {
            if rat(u.iter().sum::<i64>() * den, 1) < rat(q * num, 1) && t.contains_i64(&u) {
                brute += 1;
            }
            for i in 0..d {
                u[i] += 1;
                if u[i] <= bound {
                    continue 'outer;
                }
                u[i] = 0;
            }
            break;
        }
        prop_assert_eq!(count_scaled(&t, q as u64, &h).unwrap(), big(brute));
    }
}

fn n2() -> Arc<StandardSemigroup> {
    Arc::new(StandardSemigroup::regular(2).unwrap())
}

fn shipped_systems() -> Vec<Arc<PSystem>> {
    let corners = PSystem::new(
        n2(),
        2,
        "corners",
        Arc::new(|q| {
            SemigroupIdeal::new(
                n2(),
                &pts(&[vec![ceil_div(q, 3) as i64, 0], vec![0, ceil_div(q, 2) as i64]]),
            )
        }),
    )
    .unwrap();
    let degree = PSystem::new(n2(), 2, "sum>=q", Arc::new(|q| degree_at_least(n2(), q))).unwrap();
    let i = ideal(&reg(2), &[vec![2, 0], vec![0, 3]]);
    let frob = PSystem::frobenius_induced(i.staircase().clone(), 2).unwrap();
    let a1m = MonomialIdeal::maximal(a1());
    let a1_frob = PSystem::frobenius_induced(a1m.staircase().clone(), 2).unwrap();
    vec![Arc::new(corners), Arc::new(degree), Arc::new(frob), Arc::new(a1_frob)]
}

#[test]
fn ascending_union() {
    for sys in shipped_systems() {
        let body = PBody::new(sys.clone());
        for e1 in 0..=8u32 {
            let q1 = BigRational::from_integer(sys.q(e1).unwrap().into());
            let level = sys.level(e1).unwrap();
            for e2 in e1..=8u32.min(e1 + 3) {
                for t in level.generators() {
                    let x: Vec<BigRational> = t.to_rational().iter().map(|c| c / &q1).collect();
                    assert!(delta_q_membership(&body, e2, &x).unwrap(), "{} e1={e1} e2={e2}", sys.label());
                }
            }
        }
    }
}

#[test]
fn shipped_systems_validate() {
    for sys in shipped_systems() {
        assert!(validate_p_system(&sys, 8).unwrap().passed(), "{}", sys.label());
    }
}

#[test]
fn shipped_families_reconcile_to_e8() {
    let lab = Lab::default();
    let m2 = MonomialIdeal::maximal(reg(2));
    let fams = [
        make_family(FamilyConstructor::Frobenius(ideal(&reg(2), &[vec![2, 0], vec![0, 3]])), 8).unwrap(),
        make_family(FamilyConstructor::Power(m2.clone(), rat(1, 1)), 8).unwrap(),
        make_family(FamilyConstructor::Cartier(ideal(&reg(2), &[vec![3, 0], vec![1, 1], vec![0, 2]])), 8).unwrap(),
        make_family(FamilyConstructor::Frobenius(MonomialIdeal::maximal(a1())), 8).unwrap(),
    ];
    for fam in &fams {
        let h = lab.derived_halfspace(fam, 8).unwrap().halfspace();
        for row in lab.reconcile_lengths(fam, &h, 0..=8).unwrap() {
            assert!(row.holds, "{} {row:?}", fam.label());
        }
    }
}

#[test]
fn volume_ratio_increases_to_one() {
    let mc = McOptions::default();
    let h = sum_below(2, rat(6, 1));
    for sys in shipped_systems().into_iter().take(3) {
        let body = PBody::new(sys.clone());
        let vols: Vec<BigRational> = (0..=10)
            .map(|e| pbody_truncated_volume(&body, &h, e, &mc).unwrap().value)
            .collect();
        let last = vols.last().unwrap().clone();
        let ratios: Vec<BigRational> = vols.iter().map(|v| v / &last).collect();
        assert!(ratios.windows(2).all(|w| w[0] <= w[1]), "{}", sys.label());
        assert!(ratios[10].is_one());
        assert!(&BigRational::one() - &ratios[9] < rat(1, 100), "{}", sys.label());
    }
}

#[test]
fn orthant_volume_matches_sampling() {
    let mc = McOptions {
        samples: 100_000,
        seed: 99,
    };
    let h = sum_below(2, rat(2, 1));
    for sys in shipped_systems().into_iter().take(3) {
        let body = PBody::new(sys.clone());
        for e in [1u32, 3] {
            let exact = pbody_complement_volume(&body, &h, e, &mc).unwrap();
            assert!(exact.is_exact());
            let est = stratified_volume(&[rat(0, 1), rat(0, 1)], &[rat(2, 1), rat(2, 1)], &mc, |z, den| {
                let x: Vec<BigRational> = z.iter().map(|&v| BigRational::new(v.into(), den.into())).collect();
                z.iter().sum::<i128>() < 2 * den && !delta_q_membership(&body, e, &x).unwrap()
            })
            .unwrap();
            let gap = (est.value - &exact.value).abs();
            let gap = gap.to_f64().unwrap();
            assert!(gap <= 3.0 * est.std_err + 1e-12, "{} e={e}: {gap} vs se {}", sys.label(), est.std_err);
        }
    }
}

#[test]
fn hk_values_sandwiched_after_q0() {
    // power(m, t) on N^d: the limit is t^d / d!, and the truncated p-body
    // volume under {sum < 2t} tends to ((2t)^d - t^d) / d!.
    let eps = rat(1, 20);
    let mc = McOptions::default();
    for d in 1..=2usize {
        for t in [rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1)] {
            let fam = make_family(FamilyConstructor::Power(MonomialIdeal::maximal(reg(d)), t.clone()), 6).unwrap();
            let fact = BigRational::from_integer((1..=d).map(BigInt::from).product());
            let td = num_traits::pow(t.clone(), d);
            let limit = &td / &fact;
            let h = sum_below(d, &t * rat(2, 1));
            let target = (num_traits::pow(&t * rat(2, 1), d) - &td) / &fact;
            let system = Arc::new(fam.to_system().unwrap());
            let r = fujita_check(&system, &h, &eps, 8, Some(target), &mc).unwrap();
            let q0 = r.q0.expect("threshold reached");
            for e in 0..=8 {
                let q = fam.q(e).unwrap();
                if q < q0 {
                    continue;
                }
                let level = fam.level(e).unwrap();
                let hk = level.e_hk_exact().unwrap() / BigRational::from_integer(BigInt::from(q).pow(d as u32));
                assert!(hk >= limit && hk <= &limit + &eps, "d={d} t={t} q={q}: {hk}");
            }
        }
    }
}

#[test]
fn order_is_coordinate_sum_on_the_orthant() {
    let s = StandardSemigroup::regular(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let u: Vec<i64> = (0..3).map(|_| rng.gen_range(0..30)).collect();
        assert_eq!(m_adic_order(&s, &u), Some(u.iter().sum::<i64>() as u64));
    }
    let a = a1();
    assert_eq!(m_adic_order(a.semigroup(), &[3, 6]), Some(3));
    assert_eq!(m_adic_order(a.semigroup(), &[4, 0]), Some(4));
    assert_eq!(m_adic_order(a.semigroup(), &[1, 3]), None);
}
