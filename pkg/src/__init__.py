"""fusionhar - multi-sensor fusion and human activity recognition."""
