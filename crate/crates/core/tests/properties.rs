use deflift::complex::GradedMap;
use deflift::doc::{Context, Document, ProblemPayload};
use deflift::obstruction::DiffProblem;
use deflift::oracle::{gen_instance, InstanceSpec};
use proptest::prelude::*;

fn instance(seed: u64, p: u32) -> DiffProblem {
    let mut spec = InstanceSpec::new(seed, p);
    spec.max_kernel_dim = 12;
    let inst = gen_instance(&spec).unwrap();
    DiffProblem::new(inst.alg, &inst.complex).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn problem_documents_roundtrip(seed in 0u64..10_000, p in prop_oneof![Just(2u32), Just(3u32)]) {
        let problem = instance(seed, p);
        let doc = Document::Problem { alg: problem.alg.clone(), problem: ProblemPayload::Differential { complex: problem.mid.clone() } };
        let text = doc.to_text();
        let back = Document::parse(&text, &Context::default()).unwrap();
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn obstruction_ignores_choice_of_graded_lift(seed in 0u64..10_000, p in prop_oneof![Just(2u32), Just(3u32)], noise in any::<u64>()) {
        let problem = instance(seed, p);
        let k = &problem.kernel;
        let coords: Vec<u32> = (0..k.dim(1)).map(|i| ((noise >> (i % 64)) as u32 ^ i as u32) % p).collect();
        let other: GradedMap = problem.canonical.add(&problem.alg.bar, &k.out_of_kernel(1, &coords)).unwrap();
        prop_assert!(problem.is_graded_lift(&other).unwrap());
        let a = problem.obstruction().unwrap();
        let b = problem.obstruction_of_lift(&other).unwrap();
        prop_assert_eq!(k.class_coords(&a), k.class_coords(&b));
    }

    #[test]
    fn classification_is_a_torsor(seed in 0u64..10_000, p in prop_oneof![Just(2u32), Just(3u32)]) {
        let problem = instance(seed, p);
        match problem.classify() {
            Ok(report) => {
                let t = report.torsor.unwrap();
                prop_assert_eq!(t.count, (p as u128).pow(problem.kernel.h_dim(1) as u32));
                prop_assert_eq!(t.representatives.len() as u128, t.count);
                let first = &t.representatives[0];
                let mut seen = std::collections::BTreeSet::new();
                for r in &t.representatives {
                    prop_assert!(problem.is_lift(r).unwrap());
                    let c = problem.difference_class(first, r).unwrap();
                    prop_assert!(seen.insert(problem.kernel.class_coords(&c)));
                }
            }
            Err(e) => {
                prop_assert_eq!(e, deflift::Error::Obstructed);
                prop_assert!(!problem.obstruction().unwrap().is_zero());
            }
        }
    }
}
