from .quantum_channel import (
    DecoyEntry,
    DecoyPlacement,
    ParticleKind,
    ParticleRef,
    QuantumSystem,
    TransmittedSequence,
    check_eavesdropping,
    insert_decoys,
    remove_decoys,
    take_particles,
    transmit,
)
