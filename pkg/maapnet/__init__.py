# MAAP toolkit: max-affine arithmetic programs, exact ReLU networks,
# and the minimum spanning tree / maximum flow program families
