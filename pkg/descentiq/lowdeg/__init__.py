"""The low-degree exact sequence of a G-sheaf and its double complex."""

from descentiq.lowdeg.double import LowDegreeComplex
from descentiq.lowdeg.exactness import exactness_report, gerbe_node
from descentiq.lowdeg.hochschild_serre import hs_low_degree_compare
from descentiq.lowdeg.theta import ThetaMaps, theta1, theta2, theta3, theta4, theta5, theta6
