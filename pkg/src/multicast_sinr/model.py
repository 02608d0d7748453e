"""Network description and the matrix/vector constructions derived from it.

A network holds N multicast sessions; session i has one transmitter and
K_i receivers.  Receiver k of session i is addressed by the 1-based pair
(i, k) throughout the public API; matrix rows are laid out session-major,
receiver-minor, so row ``row_offsets[i-1] + (k-1)`` belongs to receiver
(i, k).  All gains and powers are dimensionless linear ratios; dB
conversion is the caller's concern.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

SELECTION_CAP = 10**6


class SelectionCapError(RuntimeError):
    """Raised when enumerating the embedded systems would exceed the cap."""


@dataclass(frozen=True)
class NetworkModel:
    """Immutable multicast network: sessions, link gains, noise power.

    gains is a K x N table, K = sum of receivers_per_session; entry
    ``gains[row, j]`` is the link power gain from transmitter j+1 to the
    receiver owning that row.  Every gain must be strictly positive (this
    makes every embedded interference matrix irreducible for positive
    targets); pass allow_zero_gains=True only for validation studies, in
    which case the spectral routines will reject disconnected instances
    themselves.
    """

    num_sessions: int
    receivers_per_session: tuple
    gains: np.ndarray
    noise_variance: float
    allow_zero_gains: bool = field(default=False, compare=False)

    def __post_init__(self):
        n = self.num_sessions
        if n < 1:
            raise ValueError(f"num_sessions must be >= 1, got {n}")
        ks = tuple(int(k) for k in self.receivers_per_session)
        object.__setattr__(self, "receivers_per_session", ks)
        if len(ks) != n:
            raise ValueError(
                f"receivers_per_session has {len(ks)} entries for {n} sessions"
            )
        for i, k in enumerate(ks):
            if k < 1:
                raise ValueError(f"receivers_per_session[{i}] must be >= 1, got {k}")
        g = np.array(self.gains, dtype=float, order="C")
        object.__setattr__(self, "gains", g)
        total = sum(ks)
        if g.shape != (total, n):
            raise ValueError(
                f"gains must have shape ({total}, {n}), got {g.shape}"
            )
        if not np.all(np.isfinite(g)):
            raise ValueError("gains must be finite")
        bad = np.argwhere(g <= 0.0) if not self.allow_zero_gains else np.argwhere(g < 0.0)
        if bad.size:
            r, c = bad[0]
            raise ValueError(
                f"gains[{r}][{c}] must be > 0, got {g[r, c]}"
                if not self.allow_zero_gains
                else f"gains[{r}][{c}] must be >= 0, got {g[r, c]}"
            )
        sigma2 = float(self.noise_variance)
        object.__setattr__(self, "noise_variance", sigma2)
        if not (sigma2 > 0.0 and math.isfinite(sigma2)):
            raise ValueError(f"noise_variance must be > 0, got {sigma2}")
        self.gains.setflags(write=False)

    @property
    def num_receivers(self):
        return int(sum(self.receivers_per_session))

    @property
    def row_offsets(self):
        """Length N+1 array; session i's rows are offsets[i-1]:offsets[i]."""
        return np.concatenate(([0], np.cumsum(self.receivers_per_session)))

    def row_of(self, session, receiver):
        """Row position of receiver (session, receiver), both 1-based."""
        if not 1 <= session <= self.num_sessions:
            raise ValueError(f"session {session} out of range 1..{self.num_sessions}")
        k = self.receivers_per_session[session - 1]
        if not 1 <= receiver <= k:
            raise ValueError(
                f"receiver {receiver} out of range 1..{k} for session {session}"
            )
        return int(self.row_offsets[session - 1]) + receiver - 1

    def selection_count(self):
        return math.prod(self.receivers_per_session)


def as_sinr_target(mu, model):
    """Validate a target SINR vector: length N, strictly positive."""
    mu = np.asarray(mu, dtype=float).ravel()
    if mu.shape != (model.num_sessions,):
        raise ValueError(
            f"target has {mu.size} entries for {model.num_sessions} sessions"
        )
    if not np.all(np.isfinite(mu)):
        raise ValueError("target entries must be finite")
    if np.any(mu <= 0.0):
        i = int(np.argmin(mu))
        raise ValueError(
            f"target[{i}] must be > 0, got {mu[i]}; to drop session {i + 1} "
            "remove it from the model instead of passing a zero target"
        )
    return mu


def as_power_vector(p, model):
    """Validate a power vector: length N, nonnegative."""
    p = np.asarray(p, dtype=float).ravel()
    if p.shape != (model.num_sessions,):
        raise ValueError(
            f"power vector has {p.size} entries for {model.num_sessions} sessions"
        )
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise ValueError("power entries must be finite and >= 0")
    return p


def per_receiver_sinr(model, p):
    """SINR of every receiver under power vector p, in row order.

    Row (i,k) gets gains[row,i]*p_i / (sum_{j!=i} gains[row,j]*p_j + sigma2).
    """
    p = as_power_vector(p, model)
    g = model.gains
    received = g * p  # K x N, per-transmitter received power
    total = received.sum(axis=1)
    out = np.empty(model.num_receivers)
    offsets = model.row_offsets
    for i in range(model.num_sessions):
        rows = slice(offsets[i], offsets[i + 1])
        desired = received[rows, i]
        out[rows] = desired / (total[rows] - desired + model.noise_variance)
    return out


def session_sinr(model, p):
    """Per-session SINR: the minimum over each session's receivers."""
    rec = per_receiver_sinr(model, p)
    offsets = model.row_offsets
    return np.array(
        [rec[offsets[i]:offsets[i + 1]].min() for i in range(model.num_sessions)]
    )


def interference_stack(model, mu):
    """K x N stack of normalized interference rows, scaled by the target.

    Row (i,k) holds mu_i * gains[row,j]/gains[row,i] for j != i and 0 in
    column i.  Every embedded interference matrix is built from one row per
    session of this stack.
    """
    mu = as_sinr_target(mu, model)
    g = model.gains
    offsets = model.row_offsets
    W = np.empty_like(g)
    for i in range(model.num_sessions):
        rows = slice(offsets[i], offsets[i + 1])
        W[rows] = mu[i] * g[rows] / g[rows, i][:, None]
        W[rows, i] = 0.0
    return W


@dataclass(frozen=True)
class CoefficientSystem:
    """Stacked linear system whose solutions p >= 0 meet the target.

    a_matrix is K x N with a 1 in the own-session column of each row and
    nonpositive entries elsewhere; noise_vec is the matching positive
    right-hand side.  ``a_matrix @ p >= noise_vec`` holds exactly when every
    receiver's SINR reaches its session's target.  row_index maps the
    1-based receiver pair (i, k) to its row position.
    """

    a_matrix: np.ndarray
    noise_vec: np.ndarray
    row_index: dict


def coefficient_system(model, mu):
    """Build the stacked K x N system for target mu (session-major rows)."""
    mu = as_sinr_target(mu, model)
    W = interference_stack(model, mu)
    A = -W
    offsets = model.row_offsets
    noise = np.empty(model.num_receivers)
    row_index = {}
    for i in range(model.num_sessions):
        rows = slice(offsets[i], offsets[i + 1])
        A[rows, i] = 1.0
        noise[rows] = mu[i] * model.noise_variance / model.gains[rows, i]
        for k in range(model.receivers_per_session[i]):
            row_index[(i + 1, k + 1)] = int(offsets[i]) + k
    A.setflags(write=False)
    noise.setflags(write=False)
    return CoefficientSystem(a_matrix=A, noise_vec=noise, row_index=row_index)


def check_selection(model, selection):
    """Validate a one-receiver-per-session selection (1-based indices)."""
    sel = tuple(int(k) for k in selection)
    if len(sel) != model.num_sessions:
        raise ValueError(
            f"selection has {len(sel)} entries for {model.num_sessions} sessions"
        )
    for i, k in enumerate(sel):
        limit = model.receivers_per_session[i]
        if not 1 <= k <= limit:
            raise ValueError(
                f"selection[{i}] = {k} out of range 1..{limit} for session {i + 1}"
            )
    return sel


def enumerate_selections(model, cap=SELECTION_CAP):
    """Yield every selection in lexicographic order; refuse above the cap.

    There are prod(K_i) selections; the cap keeps exhaustive enumeration an
    oracle rather than a production path.
    """
    count = model.selection_count()
    if count > cap:
        raise SelectionCapError(
            f"{count} embedded systems exceed the enumeration cap {cap}; "
            "use the iterative solver instead"
        )
    ranges = [range(1, k + 1) for k in model.receivers_per_session]
    yield from itertools.product(*ranges)


def embedded_system(model, mu, selection):
    """The N x N system (G, n_G) of one embedded single-receiver network.

    Stacks row (i, selection[i]) of the coefficient system for each session;
    I - G is entrywise nonnegative.
    """
    sel = check_selection(model, selection)
    cs = coefficient_system(model, mu)
    rows = [cs.row_index[(i + 1, k)] for i, k in enumerate(sel)]
    return cs.a_matrix[rows].copy(), cs.noise_vec[rows].copy()


def interference_matrix(model, mu, selection):
    """Nonnegative N x N matrix I - G of an embedded system (zero diagonal)."""
    sel = check_selection(model, selection)
    W = interference_stack(model, mu)
    offsets = model.row_offsets
    rows = [int(offsets[i]) + k - 1 for i, k in enumerate(sel)]
    return W[rows].copy()


def network_from_dict(data):
    """Build a NetworkModel from the scenario-file network object."""
    try:
        return NetworkModel(
            num_sessions=int(data["num_sessions"]),
            receivers_per_session=tuple(data["receivers_per_session"]),
            gains=np.asarray(data["gains"], dtype=float),
            noise_variance=float(data["noise_variance"]),
        )
    except KeyError as exc:
        raise ValueError(f"network object is missing field {exc.args[0]!r}") from None


def network_to_dict(model):
    return {
        "num_sessions": model.num_sessions,
        "receivers_per_session": list(model.receivers_per_session),
        "noise_variance": model.noise_variance,
        "gains": [list(row) for row in model.gains.tolist()],
    }


def load_network(path):
    """Read a network from a JSON file holding the bare network object."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return network_from_dict(data)
