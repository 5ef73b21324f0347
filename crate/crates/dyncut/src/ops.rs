use crate::error::Result;
use crate::graph::DynamicGraph;
use crate::sparsify::EdgeOp;

/// An update to one level's graph. `Split` appears only on contracted
/// levels: node `node` is replaced by `node` and the fresh node `new_node`;
/// `moved` re-hangs `(x, count)` edges from `node` to `new_node` and
/// `between` edges are added between the two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelOp {
    Insert(usize, usize),
    Delete(usize, usize),
    Split { node: usize, new_node: usize, moved: Vec<(usize, u32)>, between: u32 },
}

impl From<EdgeOp> for LevelOp {
    fn from(op: EdgeOp) -> Self {
        match op {
            EdgeOp::Insert(u, v) => LevelOp::Insert(u, v),
            EdgeOp::Delete(u, v) => LevelOp::Delete(u, v),
        }
    }
}

impl LevelOp {
    pub fn apply(&self, g: &mut DynamicGraph) -> Result<()> {
        match self {
            LevelOp::Insert(u, v) => g.insert_edge(*u, *v),
            LevelOp::Delete(u, v) => g.delete_edge(*u, *v),
            LevelOp::Split { node, new_node, moved, between } => g.split_vertex(*node, *new_node, moved, *between),
        }
    }

    /// The two vertices an update is anchored at.
    pub fn endpoints(&self) -> (usize, usize) {
        match self {
            LevelOp::Insert(u, v) | LevelOp::Delete(u, v) => (*u, *v),
            LevelOp::Split { node, new_node, .. } => (*node, *new_node),
        }
    }
}
