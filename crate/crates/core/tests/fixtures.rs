use fairnet_core::datagen::{
    all_rectangles, example_instance, example_net, gen_points, gen_rects, incidence, separated_instance,
};
use fairnet_core::fairness::RatioSpec;
use fairnet_core::hitting::cr_sample_feasibility;
use fairnet_core::io::{load_points_csv, load_ranges_jsonl, save_points_csv, save_ranges_jsonl};
use fairnet_core::oracle::check_epsnet;

#[test]
fn example_net_covers_drawn_rectangles() {
    let (x, ranges) = example_instance();
    let inc = incidence(&x, &ranges).unwrap();
    let net = example_net();
    assert_eq!(x.count_colors(&net), vec![1, 4]);
    assert!(check_epsnet(&x, &inc, 5.0 / 18.0, &net, false).unwrap().valid);
}

#[test]
fn example_net_misses_some_rectangle() {
    let (x, _) = example_instance();
    let inc = incidence(&x, &all_rectangles(&x).unwrap()).unwrap();
    let check = check_epsnet(&x, &inc, 5.0 / 18.0, &example_net(), false).unwrap();
    assert!(!check.valid);
    let j = check.violating.unwrap();
    assert!(inc.cardinality(j) >= 5);
    assert!(example_net().iter().all(|&i| !inc.contains(j, i)));
}

#[test]
fn separated_ratios() {
    let (x, ranges) = separated_instance();
    let inc = incidence(&x, &ranges).unwrap();
    for (spec, obstructed) in [("0.8,0.2", true), ("0.55,0.45", false), ("1/2,1/2", false)] {
        let ratios = spec.parse::<RatioSpec>().unwrap().resolve(&x, false).unwrap();
        let report = cr_sample_feasibility(&x, &inc, 0.1, &ratios).unwrap();
        assert_eq!(report.obstructed(), obstructed, "{spec}");
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let x = gen_points(300, 3, &[0.2, 0.3, 0.5], 11).unwrap();
    let fam = gen_rects(20, 3, 12).unwrap();
    save_points_csv(&x, dir.path().join("p.csv")).unwrap();
    save_ranges_jsonl(&fam, dir.path().join("r.jsonl")).unwrap();
    let x2 = load_points_csv(dir.path().join("p.csv")).unwrap();
    let fam2 = load_ranges_jsonl(dir.path().join("r.jsonl")).unwrap();
    assert_eq!(x2, x);
    assert_eq!(incidence(&x2, &fam2).unwrap(), incidence(&x, &fam).unwrap());
}
