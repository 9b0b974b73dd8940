# Zero-one law experiments: configs, the trial runner, statistics and reports
