# Random streams, set partitions and the level-by-level measures
