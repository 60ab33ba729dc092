"""DH kinematics, geometric Jacobians and singularity scans for revolute arms."""

from ._backend import DEFAULT_BACKEND, HAVE_EXTENSION
from .jacobian import (
    GeometricJacobian,
    JacobianBlocks,
    batch_determinants,
    determinant,
    finite_difference_jacobian,
    geometric_jacobian,
    manipulability,
    partition,
    rank,
)
from .kinematics import (
    FrameChain,
    HomogeneousTransform,
    dh_transform,
    end_effector_pose,
    forward_kinematics,
)
from .model import (
    DhRow,
    JointLimits,
    ModelError,
    RobotModel,
    builtin,
    dump_robot,
    load_robot,
    validate,
)
from .singularity import (
    ScanConfig,
    SingularSample,
    classify,
    closed_form_residual,
    decoupled_determinants,
    grid_scan,
    refine,
)

__version__ = "0.1.0"
