# Source Norms Package
