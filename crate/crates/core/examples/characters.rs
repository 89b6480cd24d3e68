//! Characters of Jost functions: they wind once around the circle as one
//! walks around the two-band torus, and a head-perturbed operator carries
//! the character of its periodic tail.

use fingap::jacobi::HeadOverride;
use fingap::szego::{
    character_of_j, match_torus_character, stripping_check, walk_characters, JostContext,
};
use fingap::torus::{torus_walk, TorusPoint, WalkOptions};
use fingap::{Equilibrium, GapSet};

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    let ctx = JostContext::fitted(&set, &eq)?;
    let t0 = TorusPoint::new(vec![1.5, 0.5], vec![0.0, 0.0])?;
    let walk = torus_walk(&t0, 12, WalkOptions::default())?;
    for (t, c) in walk.iter().zip(walk_characters(&ctx, &walk)?) {
        println!("b = {:+.4?}  arg C = {:+.6}", t.b(), c.values[0].arg());
    }
    let tail = &walk[4];
    let op = tail.operator().with_head(&[HeadOverride {
        n: 1,
        a: 0.9,
        b: 0.2,
    }])?;
    println!(
        "stripping relation, n = 1: {:.1e}",
        stripping_check(&ctx, &op, 1)?
    );
    let c = character_of_j(&ctx.jost_data(&op)?)?;
    let m = match_torus_character(&c, &walk, &ctx)?;
    println!(
        "matched walk point {} (tail is 4), phase distance {:.1e}",
        m.index, m.distance
    );
    Ok(())
}
