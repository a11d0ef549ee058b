import { initApp } from "./main";
import "./style.css";

const root = document.getElementById("app");
if (root) void initApp(root);
