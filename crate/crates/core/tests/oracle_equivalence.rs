mod common;

use common::{all_choice_functions, random_dataset, rng};
use revpref_core::data::ChoiceDataset;
use revpref_core::models::{
    is_rationalizable, revealed, revealed_with, ModelSpec, RevealOptions, Variant,
};
use revpref_core::oracle::{complete_domain, Oracle};

fn base_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::RATIONAL,
        ModelSpec::nc(1),
        ModelSpec::nc(2),
        ModelSpec::LA,
        ModelSpec::LC,
        ModelSpec::RSM,
        ModelSpec::TRSM,
    ]
}

fn amended_models() -> Vec<ModelSpec> {
    [Variant::La, Variant::Lc, Variant::Rsm, Variant::Trsm]
        .into_iter()
        .map(|v| ModelSpec::amended(v, 2))
        .collect()
}

fn compare(oracle: &Oracle, model: ModelSpec, d: &ChoiceDataset) -> Result<(), String> {
    let brute = oracle.rationalize(model, d).unwrap().is_some();
    let sat = is_rationalizable(model, d).unwrap();
    if brute != sat {
        return Err(format!(
            "{model}: verdict solver={sat} oracle={brute} on {d:?}"
        ));
    }
    if sat {
        let expect = oracle.revealed(model, d).unwrap();
        let got = revealed(model, d).unwrap().revealed;
        if got != expect {
            return Err(format!(
                "{model}: revealed {got:?} vs oracle {expect:?} on {d:?}"
            ));
        }
        let plain = revealed_with(
            model,
            d,
            &RevealOptions {
                use_screen: false,
                ..Default::default()
            },
        )
        .unwrap()
        .revealed;
        if plain != expect {
            return Err(format!(
                "{model}: unscreened revealed {plain:?} vs oracle {expect:?} on {d:?}"
            ));
        }
    }
    Ok(())
}

#[test]
fn complete_three_alternative_domain() {
    let data = all_choice_functions(&complete_domain(3), 3);
    assert_eq!(data.len(), 24);
    let mut failures = Vec::new();
    for model in base_models().into_iter().chain(amended_models()) {
        let oracle = Oracle::new(model.variant, 3).unwrap();
        for d in &data {
            if let Err(e) = compare(&oracle, model, d) {
                failures.push(e);
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn sampled_four_alternative_datasets() {
    let mut rng = rng(7);
    let data: Vec<ChoiceDataset> = (0..500)
        .map(|_| random_dataset(&mut rng, 4, 3, 8))
        .collect();
    let mut failures = Vec::new();
    for model in base_models().into_iter().chain(amended_models()) {
        let oracle = Oracle::new(model.variant, 4).unwrap();
        for d in &data {
            if let Err(e) = compare(&oracle, model, d) {
                failures.push(e);
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} failures\n{}",
        failures.len(),
        failures
            .iter()
            .take(20)
            .cloned()
            .collect::<Vec<_>>()
            .join("\n")
    );
}

#[test]
fn pass_probability_matches_solver_counts() {
    let menus = complete_domain(3);
    let data = all_choice_functions(&menus, 3);
    for model in base_models().into_iter().chain(amended_models()) {
        let exact = Oracle::new(model.variant, 3)
            .unwrap()
            .pass_probability(model, &menus)
            .unwrap();
        let passing = data
            .iter()
            .filter(|d| is_rationalizable(model, d).unwrap())
            .count();
        assert_eq!(exact, passing as f64 / data.len() as f64, "{model}");
    }
}

#[test]
fn pass_probability_is_antitone_along_nesting() {
    let mut rng = rng(11);
    let models: Vec<ModelSpec> = base_models().into_iter().chain(amended_models()).collect();
    let oracles: Vec<Oracle> = [
        Variant::Rational,
        Variant::Nc(1),
        Variant::Nc(2),
        Variant::La,
        Variant::Lc,
        Variant::Rsm,
        Variant::Trsm,
    ]
    .into_iter()
    .map(|v| Oracle::new(v, 4).unwrap())
    .collect();
    assert!(models
        .iter()
        .all(|m| oracles.iter().any(|o| o.variant() == m.variant)));
    for _ in 0..20 {
        let d = random_dataset(&mut rng, 4, 3, 6);
        let menus: Vec<_> = d.observations().iter().map(|o| o.menu).collect();
        let p = |m: ModelSpec| {
            let oracle = oracles.iter().find(|o| o.variant() == m.variant).unwrap();
            oracle.pass_probability(m, &menus).unwrap()
        };
        let (la, lc, rsm, trsm) = (
            p(ModelSpec::LA),
            p(ModelSpec::LC),
            p(ModelSpec::RSM),
            p(ModelSpec::TRSM),
        );
        assert!(trsm <= rsm && rsm <= lc && trsm <= la);
        for amended in amended_models() {
            assert!(p(amended) <= p(amended.base_model()));
        }
        assert!(p(ModelSpec::RATIONAL) <= p(ModelSpec::nc(2)));
        assert_eq!(p(ModelSpec::nc(1)), 1.0);
    }
}

#[test]
fn witnesses_reproduce_the_data() {
    let mut rng = rng(3);
    for model in base_models().into_iter().chain(amended_models()) {
        let oracle = Oracle::new(model.variant, 4).unwrap();
        for _ in 0..50 {
            let d = random_dataset(&mut rng, 4, 2, 6);
            if let Some(w) = oracle.rationalize(model, &d).unwrap() {
                assert!(
                    w.filter.satisfies(model.variant)
                        || matches!(model.variant, Variant::Nc(_) | Variant::Rational)
                );
                let order = w.order();
                for o in d.observations() {
                    let f = w.filter.get(o.menu);
                    assert!(f.len() >= model.floor().min(o.menu.len()));
                    let best = f
                        .iter()
                        .find(|&x| f.iter().all(|y| y == x || order.contains(x, y)));
                    assert_eq!(best, Some(o.choice), "{model}");
                }
            }
        }
    }
}
