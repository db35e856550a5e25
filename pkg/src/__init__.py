# Capra L0 Toolkit - Source Package
