# Every configurable key, grouped by block, with its default. None means
# "derived at run time" (see params.read).
PARAM_KEYS = dict(
    model=dict(
        system_dim=2,
        h_s={"z": 0.5},
        h_is={"x": 1.0, "z": 0.3},
        bath_type="goe",
        bath_dim=1024,
        bath_sites=10,
        bath_scale=1.0,
        j_coupling=1.0,
        h_x=0.9045,
        h_z=0.8090,
        coupling_scale=1.0,
        ie2_offset=0.5,
        window_count=None,
        window_center_index=None,
        window_center_energy=None,
        bath_state="typical",
        bath_state_width=None,
    ),
    protocol=dict(
        shape="linear-ramp",
        t0=0.0,
        t1=2000.0,
        lambda0=0.02,
        lambda1=0.03,
    ),
    sweep=dict(
        epsilons=None,
        epsilon_p_factors=[0.0625, 0.125, 0.25, 0.5],
        decay_factor=0.5,
        ramp_times=[2000.0],
        seeds=[0],
        window_counts=[64, 256, 1024],
        alpha=0,
        beta=1,
    ),
    numerics=dict(
        n_samples=200,
        dt=None,
        dlambda_max=1e-3,
        decay_floor=0.2,
        no_decay=0.9,
        min_fit_points=10,
        max_depletion=0.2,
        noise_floor=1e-6,
        dos_fraction=0.1,
        decay_time=None,
        transition_time=None,
        max_time=2.0e4,
    ),
    work=dict(
        beta=1.0,
        coherent_run=True,
        fast_ramp_time=20.0,
        transient_fraction=0.1,
    ),
    output=dict(
        directory="results/",
        formats=["csv", "json", "svg"],
        wandb_project=None,
        verbose=1,
    ),
)

BATH_TYPES = ("goe", "spin-chain")
BATH_STATES = ("typical", "eigenstate")
OUTPUT_FORMATS = ("csv", "json", "svg")
