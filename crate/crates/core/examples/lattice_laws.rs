//! Prints the initialization lattice of a small hierarchy: the order and the join table.

use rawtypes::model::testing::hierarchy;

fn main() {
    let p = hierarchy(&[("Object", None), ("A", Some("Object")), ("B", Some("A")), ("C", Some("Object"))]);
    let types = p.all_types();
    let names: Vec<String> = types.iter().map(|t| t.to_string()).collect();
    let w = names.iter().map(String::len).max().unwrap_or(4) + 1;
    println!("subtype (row ⊑ column)");
    print!("{:w$}", "");
    for n in &names {
        print!("{n:>w$}");
    }
    println!();
    for (t, n) in types.iter().zip(&names) {
        print!("{n:w$}");
        for u in &types {
            print!("{:>w$}", if p.subtype(t, u).unwrap() { "x" } else { "." });
        }
        println!();
    }
    println!("\njoin");
    for (t, n) in types.iter().zip(&names) {
        print!("{n:w$}");
        for u in &types {
            print!("{:>w$}", p.join(t, u).unwrap().to_string());
        }
        println!();
    }
}
