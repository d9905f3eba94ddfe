INVERSE_WISHART = "inverse_wishart"
DIAGONAL = "diagonal"
G_PRIORS = [INVERSE_WISHART, DIAGONAL]

DRAW_FILE_FORMAT = "projclust-draws/1"
# order of the per-draw fields in the draw file
DRAW_FIELDS = ["chain", "iteration", "beta", "sigma2", "G_lower", "b"]

# spawn_key slots of numpy SeedSequence: (chain, GLOBAL_STREAM) drives beta,
# sigma2 and G; (chain, SUBJECT_STREAM, key(subject id)) drives b_i
GLOBAL_STREAM = 0
SUBJECT_STREAM = 1

# at most this many draws are averaged into the fitted-means matrix
FITTED_MEANS_MAX_DRAWS = 200

KL_NEGATIVE_TOLERANCE = 1e-12
