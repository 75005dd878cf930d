//! Generates an economy from a preset and prints the statistics the
//! generator is calibrated against.
//!
//! cargo run --release --example calibration_report -- [preset|config.toml] [num_smes] [seed]

use chainrisk::synthgen::{
    attribute_availability, generate, partner_default_curve, revenue_variance_by_tier, shareholder_availability_by_tie,
    Attribute, GenConfig,
};

fn main() -> chainrisk::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("paper-calibrated", String::as_str);
    let mut config = if name.ends_with(".toml") {
        let text = std::fs::read_to_string(name).expect("readable config");
        GenConfig::from_toml_str(&text).expect("valid config")
    } else {
        GenConfig::preset(name)?
    };
    if let Some(n) = args.get(1) {
        config.num_smes = n.parse().expect("num_smes");
    }
    if let Some(s) = args.get(2) {
        config.seed = s.parse().expect("seed");
    }
    let data = generate(&config)?;
    let t = &data.truth;
    let hidden = t.hidden.iter().filter(|&&h| h).count();
    println!(
        "{} SMEs, {} owners, {} supply edges ({} hidden), default rate {:.3}",
        t.num_smes(),
        data.graph.num_nodes() - t.num_smes(),
        t.supply_edges.len(),
        hidden,
        t.defaults.iter().filter(|&&d| d).count() as f64 / t.num_smes() as f64
    );

    println!("\npartners  count  default rate");
    let curve = partner_default_curve(&t.supply_graph(), &data.node_rows());
    for b in &curve {
        println!("{:>8}  {:>5}  {:.3}", b.label, b.count, b.rate);
    }

    println!("\nattribute     RF1    RF2    RF3    RF4");
    for a in Attribute::ALL {
        print!("{:<12}", a.name());
        for k in 1..=4 {
            print!(" {:>6.1}", attribute_availability(&data.graph, a.name(), k)?);
        }
        println!();
    }

    let var = revenue_variance_by_tier(&data.graph, t);
    println!("\nrevenue variance by tier: {:.2} {:.2} {:.2}", var[0], var[1], var[2]);
    let (tied, untied) = shareholder_availability_by_tie(&data.graph);
    println!("shareholder availability: tied {tied:.1}%, untied {untied:.1}%");
    Ok(())
}
