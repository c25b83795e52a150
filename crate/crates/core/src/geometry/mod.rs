//! Diagram combinatorics and Cayley-graph experiments: the Gauss-Bonnet
//! identity for disc diagrams, reducedness and face-label verification,
//! interior-face bounds, BFS balls with exact word-problem deduplication,
//! and slimness sampling for geodesic polygons.

mod ball;
mod diagram;
mod slimness;

pub use ball::{cayley_ball, free_ball_size, BallError, CayleyBall, MAX_BALL_BRANCH};
pub use diagram::{
    d_ext, d_int, euler_identity, interior_face_bound, verify_diagram, DiagramCheckReport,
    DiagramEdge, DiagramError, DiagramFace, EulerIdentity, VanKampenDiagram,
};
pub use slimness::{measure_slimness, SlimnessConfig, SlimnessError, SlimnessResult};
