//! Shared fixtures for the pipeline benchmarks.

use heattrace_core::synth::{generate_scene, SceneSpec, SynthScene};

/// A default-sized scene (1280x960 RGB, 80x60 thermal, 22 objects) with
/// sensor noise, generated once per benchmark run.
pub fn default_scene() -> SynthScene {
    generate_scene(&SceneSpec {
        seed: 1234,
        ..SceneSpec::default()
    })
    .expect("default spec generates")
}

/// A small scene for cheap per-iteration benchmarks.
pub fn small_scene() -> SynthScene {
    generate_scene(&SceneSpec {
        seed: 1234,
        rgb_dims: (320, 240),
        thermal_dims: (40, 30),
        n_objects: 8,
        n_hiders: 2,
        object_size_range: (20.0, 60.0),
        ..SceneSpec::default()
    })
    .expect("small spec generates")
}
