//! Builds a scene from its text description, renders it, and prints the
//! ground truth with the provider's flow error on the target.

use uft::synth::{render_scene, synth_flow, Scenario};

const SCENE: &str = "
width = 64
height = 48
frames = 8
seed = 3
camera.shift = 1,0
object.0.shape = ellipse
object.0.size = 12,10
object.0.start = 20,24
object.0.velocity = 3,1
object.0.target = true
object.1.size = 12,10
object.1.start = 44,20
object.1.velocity = -2,0
noise.flow_scale = 0.3
noise.motion_gain = 0.1
";

fn main() -> uft::Result<()> {
    let scenario = Scenario::parse(SCENE)?;
    let frames = render_scene(&scenario.to_scene_spec()?)?;
    for f in &frames {
        let flow = synth_flow(f, &scenario.noise, f.index as u64);
        let mask = f.target_mask();
        let n = mask.count().max(1) as f64;
        let (mut err, mut b) = (0.0, 0.0);
        for (r, c) in mask.foreground() {
            err += (flow.mean_u.get(r, c) - f.true_flow.mean_u.get(r, c)).abs();
            b += flow.scale_u.get(r, c);
        }
        let c = f.gt.center();
        println!(
            "frame {}: target at ({:5.1}, {:5.1}), {:3} px visible, |u error| {:.2}, reported b {:.2}",
            f.index,
            c.x,
            c.y,
            mask.count(),
            err / n,
            b / n
        );
    }
    println!("\n{}", scenario.to_text());
    Ok(())
}
