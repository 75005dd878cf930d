use chainrisk::synthgen::{
    generate, partner_default_curve, revenue_variance_by_tier, shareholder_availability_by_tie, GenConfig,
};

fn calibrated(seed: u64, num_smes: usize) -> GenConfig {
    GenConfig { seed, num_smes, ..GenConfig::paper_calibrated() }
}

#[test]
fn thirty_percent_of_a_thousand_supply_edges_are_hidden() {
    // Walk seeds and sizes until an economy realizes exactly 1000 supply edges.
    let found = (1..200u64)
        .flat_map(|seed| (380..440).step_by(5).map(move |n| (seed, n)))
        .map(|(seed, n)| generate(&calibrated(seed, n)).unwrap())
        .find(|d| d.truth.supply_edges.len() == 1000)
        .expect("some size yields exactly 1000 supply edges");
    assert_eq!(found.truth.hidden_edges().len(), 300);
    assert_eq!(found.pair_rows().iter().filter(|r| r.2).count(), 300);
}

#[test]
fn default_rate_falls_with_partner_count() {
    let d = generate(&calibrated(7, 10_000)).unwrap();
    let curve = partner_default_curve(&d.truth.supply_graph(), &d.node_rows());
    assert_eq!(curve.len(), 4);
    assert!(curve.windows(2).all(|w| w[0].rate >= w[1].rate), "{curve:?}");
    assert_eq!(curve.iter().map(|b| b.count).sum::<usize>(), 10_000);
}

#[test]
fn upstream_revenue_varies_more_than_downstream() {
    let d = generate(&calibrated(7, 10_000)).unwrap();
    let v = revenue_variance_by_tier(&d.graph, &d.truth);
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
}

#[test]
fn owner_ties_raise_shareholder_availability() {
    let d = generate(&calibrated(7, 10_000)).unwrap();
    let (tied, untied) = shareholder_availability_by_tie(&d.graph);
    assert!(tied >= untied + 10.0, "tied {tied:.1}% vs untied {untied:.1}%");
}

#[test]
fn hidden_edges_concentrate_on_offline_firms() {
    let d = generate(&calibrated(3, 5000)).unwrap();
    let t = &d.truth;
    let share = |edges: &[(usize, usize)]| {
        edges.iter().filter(|&&(u, v)| t.offline[u] || t.offline[v]).count() as f64 / edges.len() as f64
    };
    assert!(share(&t.hidden_edges()) > 2.0 * share(&t.observed_edges()));
}
