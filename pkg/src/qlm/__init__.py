"""Hawking/Bartnik mass bounds for CMC spheres via warped collar extensions."""
