pub mod formation;
pub mod game;
pub mod geometry;
pub mod par;
pub mod playbook;
pub mod render;
pub mod sim;
pub mod solver;
pub mod thresholds;
pub mod transition;
